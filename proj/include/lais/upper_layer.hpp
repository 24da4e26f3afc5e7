// Copyright 2026 The LAIS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LAIS_UPPER_LAYER_HPP
#define LAIS_UPPER_LAYER_HPP

#include <lais/gaussian.hpp>
#include <lais/rng.hpp>
#include <lais/target.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>
#include <variant>
#include <vector>

/**
 * \file
 * \brief MCMC chains that produce the location parameters of the lower layer.
 *
 * Three transition kernels are available: Gaussian random-walk Metropolis-Hastings,
 * Hamiltonian Monte Carlo with an isotropic mass, and a component-wise random-walk sweep
 * (MH-within-Gibbs). Every chain keeps the target value of its current state, so each
 * iteration costs exactly the evaluations its kernel needs and never re-evaluates the
 * current state.
 */

namespace lais {

/// Gaussian random-walk proposal `phi(z | mu) = N(z; mu, proposal_covariance)`.
struct RandomWalkMh {
  Matrix proposal_covariance;
};

/// HMC with kinetic energy `|p|^2 / (2 mass)`, i.e. momenta `p ~ N(0, mass I)`.
struct HmcParams {
  double step_size = 0.1;
  int leapfrog_steps = 1;
  double mass = 1.0;  ///< The squared scale `lambda^2` of the momentum distribution.

  void validate() const {
    if (!(step_size > 0.0) || leapfrog_steps < 1 || !(mass > 0.0)) {
      throw ArgumentError("HmcParams: need step_size > 0, leapfrog_steps >= 1 and mass > 0");
    }
  }
};

enum class ScanOrder { kAscending, kRandom };

/// Component-wise random-walk sweep: `inner_steps` one-dimensional MH updates per coordinate.
struct GibbsConfig {
  int inner_steps = 2;
  Vector per_coordinate_scale;  ///< Standard deviation of each coordinate's random walk.
  ScanOrder scan = ScanOrder::kAscending;
};

using TransitionKernel = std::variant<RandomWalkMh, HmcParams, GibbsConfig>;

/// Everything needed to run one chain.
struct ChainConfig {
  TargetDensity target;  ///< Invariant density: complete, partial or tempered posterior.
  TransitionKernel kernel;
  std::size_t iterations = 1;  ///< T.
  Vector init_state;  ///< Used first when non-empty.
  std::function<Vector(Rng&)> init_sampler;  ///< Draws (re)starting points.
  std::uint64_t seed = 0;
};

/// Full output of one chain.
/**
 * `states[t]` is `mu_t` for `t = 0..T`; `candidates[t - 1]` is `z_t`, the point proposed
 * from `mu_{t-1}`, with its stored target value and proposal log-density. For kernels
 * whose candidates are not draws from a fixed Gaussian random walk (HMC, Gibbs sweeps)
 * `candidate_log_proposal` holds NaN and the record cannot be recycled.
 */
struct ChainRecord {
  std::vector<Vector> states;
  std::vector<double> state_log_target;
  std::vector<Vector> candidates;
  std::vector<double> candidate_log_target;
  std::vector<double> candidate_log_proposal;
  std::vector<bool> accepted;
  std::vector<double> energy_error;  ///< HMC only: `H(x', p') - H(x, p)` per step.
  Matrix proposal_covariance;  ///< Random-walk covariance, empty for other kernels.
  bool invariant_is_full_posterior = true;
  std::size_t init_attempts = 1;
  EvalLedger ledger;

  [[nodiscard]] std::size_t iterations() const noexcept { return candidates.size(); }
  [[nodiscard]] Eigen::Index dimension() const { return states.empty() ? 0 : states.front().size(); }
  [[nodiscard]] bool recyclable() const {
    return proposal_covariance.size() > 0 &&
           std::none_of(candidate_log_proposal.begin(), candidate_log_proposal.end(), [](double v) {
             return std::isnan(v);
           });
  }
  [[nodiscard]] double acceptance_rate() const {
    if (accepted.empty()) {
      return 0.0;
    }
    return static_cast<double>(std::count(accepted.begin(), accepted.end(), true)) /
           static_cast<double>(accepted.size());
  }
};

/// One transition: the next state plus what was proposed.
struct StepOutcome {
  Vector next;
  double next_log_target = kNegInf;
  Vector candidate;
  double candidate_log_target = kNegInf;
  double candidate_log_proposal = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  double energy_error = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

[[nodiscard]] inline bool metropolis_accept(double log_ratio, Rng& rng) {
  const double log_u = std::log(uniform01(rng));
  return log_u < log_ratio;
}

}  // namespace detail

/// One random-walk MH step from `current`, whose target value is already known.
/**
 * Exactly one target evaluation. The proposal is symmetric so the acceptance ratio is
 * `pi(z) / pi(current)`; a candidate with zero density is always rejected.
 */
[[nodiscard]] inline StepOutcome rw_mh_step(
    const Vector& current,
    double current_log_target,
    const GaussianKernel& proposal,
    const TargetDensity& target,
    Rng& rng,
    EvalLedger& ledger) {
  StepOutcome out;
  out.candidate = proposal.sample(current, rng);
  out.candidate_log_proposal = proposal.log_pdf(out.candidate, current);
  out.candidate_log_target = target.log_density(out.candidate, ledger);
  out.accepted = detail::metropolis_accept(out.candidate_log_target - current_log_target, rng) &&
                 out.candidate_log_target != kNegInf;
  out.next = out.accepted ? out.candidate : current;
  out.next_log_target = out.accepted ? out.candidate_log_target : current_log_target;
  return out;
}

/// Result of a leapfrog integration.
struct LeapfrogResult {
  Vector position;
  Vector momentum;
  bool divergent = false;
};

/// `steps` leapfrog updates of `(x, p)` for the Hamiltonian `-log pi(x) + |p|^2 / (2 mass)`.
/**
 * Uses `steps + 1` gradient evaluations. A gradient that throws or is not finite stops the
 * integration and marks the trajectory divergent; the position reached so far is returned.
 */
[[nodiscard]] inline LeapfrogResult leapfrog(
    Vector x,
    Vector p,
    double step_size,
    int steps,
    const std::function<Vector(const Vector&)>& grad_log_density,
    double mass = 1.0) {
  LeapfrogResult out;
  const auto safe_grad = [&](const Vector& at, Vector& g) {
    try {
      g = grad_log_density(at);
    } catch (const GradientError&) {
      return false;
    }
    return g.allFinite();
  };
  Vector g;
  if (!safe_grad(x, g)) {
    return {std::move(x), std::move(p), true};
  }
  for (int l = 0; l < steps; ++l) {
    p += 0.5 * step_size * g;
    x += (step_size / mass) * p;
    if (!safe_grad(x, g)) {
      return {std::move(x), std::move(p), true};
    }
    p += 0.5 * step_size * g;
  }
  out.position = std::move(x);
  out.momentum = std::move(p);
  return out;
}

/// One HMC transition with momenta `p ~ N(0, mass I)`.
/**
 * One target evaluation at the end point plus `L + 1` gradients. Divergent trajectories
 * are rejected; their end point is still evaluated when it is finite, so the per-step
 * target cost stays exactly one.
 */
[[nodiscard]] inline StepOutcome hmc_step(
    const Vector& current,
    double current_log_target,
    const HmcParams& params,
    const TargetDensity& target,
    Rng& rng,
    EvalLedger& ledger) {
  const Vector p0 = std::sqrt(params.mass) * standard_normal(rng, current.size());
  const auto grad = [&](const Vector& x) { return target.gradient(x, ledger); };
  auto traj = leapfrog(current, p0, params.step_size, params.leapfrog_steps, grad, params.mass);

  StepOutcome out;
  out.candidate = traj.position;
  const bool finite_end = traj.position.allFinite();
  out.candidate_log_target = finite_end ? target.log_density(traj.position, ledger) : kNegInf;
  const double h0 = -current_log_target + 0.5 * p0.squaredNorm() / params.mass;
  const double h1 = -out.candidate_log_target + 0.5 * traj.momentum.squaredNorm() / params.mass;
  out.energy_error = traj.divergent ? std::numeric_limits<double>::infinity() : h1 - h0;
  const bool ok = !traj.divergent && out.candidate_log_target != kNegInf && std::isfinite(h1);
  out.accepted = detail::metropolis_accept(h0 - h1, rng) && ok;
  out.next = out.accepted ? out.candidate : current;
  out.next_log_target = out.accepted ? out.candidate_log_target : current_log_target;
  return out;
}

/// One sweep of coordinate-wise random-walk MH over all coordinates.
/**
 * `D * inner_steps` target evaluations. The reported candidate is the post-sweep state
 * and `accepted` tells whether the sweep moved at all.
 */
[[nodiscard]] inline StepOutcome gibbs_sweep(
    const Vector& current,
    double current_log_target,
    const GibbsConfig& config,
    const TargetDensity& target,
    Rng& rng,
    EvalLedger& ledger) {
  const auto dim = current.size();
  if (config.inner_steps < 1) {
    throw ArgumentError("gibbs_sweep: inner_steps must be at least 1");
  }
  if (config.per_coordinate_scale.size() != dim || !(config.per_coordinate_scale.array() > 0.0).all()) {
    throw ArgumentError("gibbs_sweep: need one positive scale per coordinate");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (config.scan == ScanOrder::kRandom) {
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::normal_distribution<double> normal;
  Vector x = current;
  double log_target = current_log_target;
  bool moved = false;
  for (const auto j : order) {
    for (int s = 0; s < config.inner_steps; ++s) {
      Vector z = x;
      z[j] += config.per_coordinate_scale[j] * normal(rng);
      const double lz = target.log_density(z, ledger);
      if (detail::metropolis_accept(lz - log_target, rng) && lz != kNegInf) {
        x = std::move(z);
        log_target = lz;
        moved = true;
      }
    }
  }
  StepOutcome out;
  out.candidate = x;
  out.candidate_log_target = log_target;
  out.accepted = moved;
  out.next = std::move(x);
  out.next_log_target = log_target;
  return out;
}

/// Runs one chain for `config.iterations` transitions.
/**
 * The starting point is `init_state` when given, otherwise a draw from `init_sampler`. A
 * start with zero density is redrawn from `init_sampler` up to 100 times before giving up
 * with InitError. Evaluations spent on starting points go to `ledger.init_evals`.
 */
[[nodiscard]] inline ChainRecord run_chain(const ChainConfig& config, std::size_t chain_index = 0) {
  if (config.iterations < 1) {
    throw ArgumentError("run_chain: need at least one iteration");
  }
  const auto& target = config.target;
  Rng rng{config.seed};
  ChainRecord rec;
  rec.invariant_is_full_posterior = target.is_full_posterior();

  EvalLedger init_ledger;
  Vector x;
  double log_target = kNegInf;
  constexpr std::size_t kMaxInitAttempts = 100;
  std::size_t attempts = 0;
  if (config.init_state.size() > 0) {
    x = config.init_state;
    log_target = target.log_density(x, init_ledger);
    ++attempts;
  }
  while (log_target == kNegInf) {
    if (!config.init_sampler || attempts >= kMaxInitAttempts) {
      throw InitError(chain_index, "no starting point with positive density after " + std::to_string(attempts) +
                                       " attempts");
    }
    x = config.init_sampler(rng);
    log_target = target.log_density(x, init_ledger);
    ++attempts;
  }
  rec.init_attempts = attempts;
  rec.ledger.init_evals = init_ledger.posterior_total();

  const auto T = config.iterations;
  rec.states.reserve(T + 1);
  rec.state_log_target.reserve(T + 1);
  rec.candidates.reserve(T);
  rec.states.push_back(x);
  rec.state_log_target.push_back(log_target);

  std::optional<GaussianKernel> rw;
  if (const auto* mh = std::get_if<RandomWalkMh>(&config.kernel)) {
    if (mh->proposal_covariance.rows() != x.size()) {
      throw ArgumentError("run_chain: proposal covariance has the wrong dimension");
    }
    rw.emplace(mh->proposal_covariance);
    rec.proposal_covariance = mh->proposal_covariance;
  } else if (const auto* hmc = std::get_if<HmcParams>(&config.kernel)) {
    hmc->validate();
  }

  for (std::size_t t = 1; t <= T; ++t) {
    StepOutcome step;
    if (rw) {
      step = rw_mh_step(x, log_target, *rw, target, rng, rec.ledger);
    } else if (const auto* hmc = std::get_if<HmcParams>(&config.kernel)) {
      step = hmc_step(x, log_target, *hmc, target, rng, rec.ledger);
    } else {
      step = gibbs_sweep(x, log_target, std::get<GibbsConfig>(config.kernel), target, rng, rec.ledger);
    }
    x = step.next;
    log_target = step.next_log_target;
    rec.states.push_back(std::move(step.next));
    rec.state_log_target.push_back(log_target);
    rec.candidates.push_back(std::move(step.candidate));
    rec.candidate_log_target.push_back(step.candidate_log_target);
    rec.candidate_log_proposal.push_back(step.candidate_log_proposal);
    rec.accepted.push_back(step.accepted);
    rec.energy_error.push_back(step.energy_error);
  }
  return rec;
}

/// Runs independent chains, optionally on several threads.
/**
 * Each chain owns its RNG (seeded from its config) and its ledger, so the output does not
 * depend on `threads` or on scheduling. The first failing chain (by index) is rethrown.
 */
[[nodiscard]] inline std::vector<ChainRecord> run_parallel_chains(
    const std::vector<ChainConfig>& configs,
    unsigned threads = 1) {
  if (configs.empty()) {
    throw ArgumentError("run_parallel_chains: need at least one chain");
  }
  std::vector<ChainRecord> out(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t n = next++; n < configs.size(); n = next++) {
      try {
        out[n] = run_chain(configs[n], n);
      } catch (...) {
        errors[n] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(worker);
    }
  }
  for (const auto& error : errors) {
    if (error) {
      std::rethrow_exception(error);
    }
  }
  return out;
}

/// Sum of the chain ledgers, in chain order.
[[nodiscard]] inline EvalLedger merged_ledger(const std::vector<ChainRecord>& records) {
  EvalLedger total;
  for (const auto& rec : records) {
    total.merge(rec.ledger);
  }
  return total;
}

/// Writes `t,accepted,state_1..state_D,candidate_1..candidate_D,log_target_candidate,log_proposal_candidate`.
/**
 * Row `t` (1-based) holds the state after step `t` and the candidate proposed at step `t`.
 */
inline void write_chain_csv(const ChainRecord& rec, std::ostream& out) {
  const auto dim = rec.dimension();
  out << "t,accepted";
  for (Eigen::Index j = 1; j <= dim; ++j) {
    out << ",state_" << j;
  }
  for (Eigen::Index j = 1; j <= dim; ++j) {
    out << ",candidate_" << j;
  }
  out << ",log_target_candidate,log_proposal_candidate\n" << std::setprecision(17);
  for (std::size_t t = 1; t <= rec.iterations(); ++t) {
    out << t << ',' << (rec.accepted[t - 1] ? 1 : 0);
    for (Eigen::Index j = 0; j < dim; ++j) {
      out << ',' << rec.states[t][j];
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      out << ',' << rec.candidates[t - 1][j];
    }
    out << ',' << rec.candidate_log_target[t - 1] << ',' << rec.candidate_log_proposal[t - 1] << '\n';
  }
}

}  // namespace lais

#endif
