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

#ifndef LAIS_HARNESS_EXPERIMENT_HPP
#define LAIS_HARNESS_EXPERIMENT_HPP

#include <lais/compression.hpp>
#include <lais/harness/config.hpp>
#include <lais/lower_layer.hpp>
#include <lais/models/bayesian_model.hpp>
#include <lais/models/conjugate_basis.hpp>
#include <lais/models/gaussian_location.hpp>
#include <lais/models/gaussian_mixture.hpp>
#include <lais/models/logistic_map.hpp>
#include <lais/models/regression.hpp>
#include <lais/parallel.hpp>
#include <lais/upper_layer.hpp>

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lais {

/// A target built from its config section.
struct BuiltTarget {
  TargetDensity posterior;  ///< The complete posterior, charged to the full counter.
  std::shared_ptr<const BayesianModel> model;  ///< Null for the mixture targets.
  std::optional<AnalyticTruth> truth;
  Vector init_low;  ///< Default initialization box for the chains.
  Vector init_high;

  [[nodiscard]] Eigen::Index dimension() const { return posterior.dimension(); }
};

struct TargetInfo {
  std::string name;
  std::string description;
};

[[nodiscard]] inline std::vector<TargetInfo> target_catalog() {
  return {
      {"five_mode", "2-D mixture of five Gaussians, E[X] = [1.6, 1.4], Z = 1"},
      {"bimodal", "2-D mixture of two correlated Gaussians, E[X] = [-2, 2], Z = 1"},
      {"high_dim", "D-dimensional three-mode isotropic mixture, E[X_j] = 4/3 (dimension = D)"},
      {"gaussian", "standard normal N(0, I_D), Z = 1 (dimension = D)"},
      {"regression", "damped-sinusoid regression, 50 points, noise 0.1, uniform prior on [0,10]x[0,2pi]"},
      {"logistic", "noisy logistic map, K = 20, parameters (R, Omega), uniform prior on [0,1e4]^2 (noise = lambda)"},
      {"conjugate_basis", "basis-function regression with coefficients integrated out; (lambda, h, sigma_e)"},
      {"gaussian_location", "1-D Gaussian mean with a Gaussian prior; closed-form posterior and evidence"},
  };
}

/// Builds a benchmark target; datasets are regenerated from `data_seed`.
[[nodiscard]] inline BuiltTarget make_target(const TargetSpec& spec) {
  BuiltTarget out;
  std::shared_ptr<const LogDensity> density;
  const auto box = [&](double low, double high, Eigen::Index dim) {
    out.init_low = Vector::Constant(dim, low);
    out.init_high = Vector::Constant(dim, high);
  };
  const auto data_size = [&](std::size_t fallback) { return spec.data_size > 0 ? spec.data_size : fallback; };
  if (spec.name == "five_mode") {
    density = make_five_mode_mixture();
    box(-4.0, 4.0, 2);
  } else if (spec.name == "bimodal") {
    density = make_bimodal_mixture();
    box(-10.0, 10.0, 2);
  } else if (spec.name == "high_dim") {
    density = make_high_dim_mixture(spec.dimension);
    box(-6.0, 6.0, spec.dimension);
  } else if (spec.name == "gaussian") {
    if (spec.dimension < 1) {
      throw ConfigError("target.dimension must be positive");
    }
    density = make_gaussian(Vector::Zero(spec.dimension), 1.0);
    box(-1.0, 1.0, spec.dimension);
  } else if (spec.name == "regression") {
    out.model = std::make_shared<RegressionModel>(
        make_regression_dataset(spec.data_seed, data_size(50)), spec.noise.value_or(0.1));
  } else if (spec.name == "logistic") {
    const double lambda = spec.noise.value_or(0.01);
    out.model = std::make_shared<LogisticMapModel>(
        make_logistic_trajectory(spec.data_seed, lambda, data_size(20)), lambda);
    out.init_low = detail::vec2(1.0, 0.38);
    out.init_high = detail::vec2(5.0, 1.5);
  } else if (spec.name == "conjugate_basis") {
    BasisKind kind = BasisKind::kGaussian;
    if (spec.basis_kind == "laplacian") {
      kind = BasisKind::kLaplacian;
    } else if (spec.basis_kind != "gaussian") {
      throw ConfigError("target.basis_kind must be \"gaussian\" or \"laplacian\"");
    }
    auto data = make_conjugate_basis_dataset(
        spec.data_seed, data_size(30), spec.basis_count, kind, 200.0, 5.0, spec.noise.value_or(3.0));
    out.model = std::make_shared<ConjugateBasisModel>(std::move(data), spec.basis_count, kind);
  } else if (spec.name == "gaussian_location") {
    const double noise = spec.noise.value_or(1.0);
    DataSet data;
    auto rng = make_rng(spec.data_seed, {static_cast<std::uint64_t>(Stream::kData)});
    std::normal_distribution<double> draw{spec.prior_mean + spec.prior_sd, noise};
    for (std::size_t i = 0; i < data_size(10); ++i) {
      data.t.push_back(static_cast<double>(i + 1));
      data.y.push_back(draw(rng));
    }
    out.model = std::make_shared<GaussianLocationModel>(std::move(data), noise, spec.prior_mean, spec.prior_sd);
  } else {
    throw ConfigError("unknown target '" + spec.name + "' (see `lais list-targets`)");
  }

  if (out.model) {
    density = make_posterior(out.model).shared_density();
    if (out.init_low.size() == 0) {
      if (const auto b = out.model->prior_box()) {
        out.init_low = b->low;
        out.init_high = b->high;
      }
    }
  }
  if (spec.log_shift != 0.0) {
    density = std::make_shared<ShiftedDensity>(density, spec.log_shift);
  }
  out.posterior = TargetDensity{density};
  out.truth = density->truth();
  if (!spec.reference_mean.empty()) {
    if (static_cast<Eigen::Index>(spec.reference_mean.size()) != out.dimension()) {
      throw ConfigError("target.reference_mean has the wrong length");
    }
    AnalyticTruth t = out.truth.value_or(AnalyticTruth{});
    t.mean = Eigen::Map<const Vector>(spec.reference_mean.data(), out.dimension());
    out.truth = t;
  }
  return out;
}

/// Analytic evaluation counts of one run.
struct ExpectedCost {
  std::uint64_t full = 0;
  std::uint64_t partial = 0;
  std::uint64_t proposal = 0;
  std::uint64_t lower_draws = 0;

  [[nodiscard]] std::uint64_t posterior_total() const noexcept { return full + partial; }
};

namespace detail {

[[nodiscard]] inline DenominatorKind scheme_kind(const std::string& name) {
  try {
    return parse_denominator(name);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

[[nodiscard]] inline bool chains_target_complete_posterior(const UpperSpec& up) {
  return up.invariant == "full" || (up.invariant == "tempered" && up.beta == 1.0);
}

}  // namespace detail

/// Evaluation counts implied by the config, or nothing when they depend on the run.
/**
 * HMC on a target without an analytic gradient charges finite differences along
 * trajectories that may stop early, so its cost is not known in advance.
 */
[[nodiscard]] inline std::optional<ExpectedCost> expected_cost(const ExperimentConfig& config, const BuiltTarget& target) {
  const auto& up = config.upper;
  const auto& lo = config.lower;
  const auto N = static_cast<std::uint64_t>(up.chains);
  const auto T = static_cast<std::uint64_t>(up.iterations);
  const auto D = static_cast<std::uint64_t>(target.dimension());
  ExpectedCost cost;
  if (config.run.method == "naive_mc") {
    cost.full = config.run.naive_samples;
    return cost;
  }
  if (up.algorithm == "hmc" && !target.posterior.density().has_gradient()) {
    return std::nullopt;
  }
  const std::uint64_t per_step = up.algorithm == "gibbs" ? D * static_cast<std::uint64_t>(up.inner_steps) : 1;
  const std::uint64_t steps = config.run.method == "plain_mcmc" ? 2 * T : T;
  const std::uint64_t upper = N * steps * per_step;
  (up.invariant == "partial" ? cost.partial : cost.full) += upper;
  if (config.run.method == "plain_mcmc") {
    return cost;
  }
  DenominatorScheme scheme;
  scheme.kind = detail::scheme_kind(lo.scheme);
  const auto per_sample = [&](bool own_known) -> std::uint64_t {
    if (scheme.kind == DenominatorKind::kCompressed) {
      return lo.clusters;
    }
    return denominator_cost(scheme, up.chains, up.iterations, own_known);
  };
  if (lo.recycle) {
    if (!detail::chains_target_complete_posterior(up)) {
      cost.full += N * T;
    }
    cost.proposal = N * T * per_sample(true);
  } else {
    cost.lower_draws = N * T * lo.samples;
    cost.full += cost.lower_draws;
    cost.proposal = cost.lower_draws * per_sample(false);
  }
  return cost;
}

/// Cost in single-observation likelihood terms: a full evaluation touches all `data_size`
/// points, a partial evaluation on part `n` touches `subset_sizes[n]` of them.
[[nodiscard]] inline std::uint64_t likelihood_cost(
    const EvalLedger& ledger,
    std::size_t data_size,
    const std::vector<std::size_t>& subset_sizes) {
  std::uint64_t cost = ledger.full_posterior_evals * data_size;
  for (const auto& [index, n] : ledger.partial_posterior_evals) {
    if (index >= subset_sizes.size()) {
      throw ArgumentError("likelihood_cost: no subset size for part " + std::to_string(index));
    }
    cost += n * subset_sizes[index];
  }
  return cost;
}

/// Wall-clock per pipeline stage, in milliseconds.
struct StageTimes {
  double upper_ms = 0.0;
  double compression_ms = 0.0;
  double sampling_ms = 0.0;
  double weighting_ms = 0.0;

  [[nodiscard]] double lower_ms() const noexcept { return compression_ms + sampling_ms + weighting_ms; }

  StageTimes& operator+=(const StageTimes& o) noexcept {
    upper_ms += o.upper_ms;
    compression_ms += o.compression_ms;
    sampling_ms += o.sampling_ms;
    weighting_ms += o.weighting_ms;
    return *this;
  }
};

/// Output of one repetition.
/**
 * Initial-state evaluations sit in `ledger.init_evals`, outside the posterior counters,
 * so `ledger.posterior_total()` is the run's E.
 */
struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string method = "lais";
  std::string scheme;
  std::size_t N = 0;
  std::size_t T = 0;
  std::size_t M = 0;
  std::size_t B = 0;
  EstimatorOutput estimate;
  bool has_evidence = true;  ///< False for MCMC baselines, which give no evidence estimate.
  std::optional<MomentEstimate> moments;
  EvalLedger ledger;
  StageTimes wall;
};

/// Aggregates across repetitions. MSEs are present only when the target has ground truth.
struct RunSummary {
  std::size_t runs = 0;
  std::optional<double> mse_I;
  std::optional<double> mse_Z;
  std::optional<double> mse_moments;  ///< Means, variances and covariances, averaged.
  std::optional<double> mean_Z;
  std::optional<double> var_Z;
  std::optional<double> mean_log_Z;
  EvalLedger totals;
  StageTimes wall;
};

struct RunResult {
  ExperimentConfig config;
  Eigen::Index dimension = 0;
  std::vector<RunRecord> runs;
  RunSummary summary;
};

/// Mean squared error averaged over runs and over the components of the estimate.
[[nodiscard]] inline double aggregate_mse(const std::vector<Vector>& estimates, const Vector& truth) {
  if (estimates.size() < 2) {
    throw ArgumentError("aggregate_mse: need at least two runs");
  }
  double total = 0.0;
  for (const auto& e : estimates) {
    if (e.size() != truth.size()) {
      throw ArgumentError("aggregate_mse: estimate and truth differ in length");
    }
    total += (e - truth).squaredNorm() / static_cast<double>(truth.size());
  }
  return total / static_cast<double>(estimates.size());
}

/// Stacks the means, variances and upper-triangle covariances into one vector.
[[nodiscard]] inline Vector moment_quantities(const Vector& mean, const Matrix& covariance) {
  const auto D = mean.size();
  Vector out(D + D + D * (D - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < D; ++i) {
    out[k++] = mean[i];
  }
  for (Eigen::Index i = 0; i < D; ++i) {
    out[k++] = covariance(i, i);
  }
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index j = i + 1; j < D; ++j) {
      out[k++] = covariance(i, j);
    }
  }
  return out;
}

/// Averaged MSE over every mean, variance and covariance: five quantities in 2-D.
[[nodiscard]] inline double moment_mse(const std::vector<MomentEstimate>& estimates, const Vector& mean, const Matrix& covariance) {
  std::vector<Vector> stacked;
  stacked.reserve(estimates.size());
  for (const auto& e : estimates) {
    stacked.push_back(moment_quantities(e.mean, e.covariance));
  }
  return aggregate_mse(stacked, moment_quantities(mean, covariance));
}

/// Fills `result.summary` from `result.runs`; a deterministic fold in run order.
inline void summarize(RunResult& result, const std::optional<AnalyticTruth>& truth) {
  auto& s = result.summary;
  s = RunSummary{};
  s.runs = result.runs.size();
  std::vector<Vector> means;
  std::vector<MomentEstimate> moments;
  std::vector<double> z;
  for (const auto& r : result.runs) {
    s.totals.merge(r.ledger);
    s.wall += r.wall;
    means.push_back(r.estimate.I_hat);
    if (r.moments) {
      moments.push_back(*r.moments);
    }
    if (r.has_evidence) {
      z.push_back(r.estimate.Z_hat);
    }
  }
  if (!z.empty()) {
    double sum = 0.0;
    double log_sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      sum += z[i];
      log_sum += result.runs[i].estimate.log_Z_hat;
    }
    s.mean_Z = sum / static_cast<double>(z.size());
    s.mean_log_Z = log_sum / static_cast<double>(z.size());
    if (z.size() >= 2) {
      double ss = 0.0;
      for (const double v : z) {
        ss += (v - *s.mean_Z) * (v - *s.mean_Z);
      }
      s.var_Z = ss / static_cast<double>(z.size() - 1);
    }
  }
  if (!truth || means.size() < 2) {
    return;
  }
  s.mse_I = aggregate_mse(means, truth->mean);
  if (truth->covariance && moments.size() == means.size()) {
    s.mse_moments = moment_mse(moments, truth->mean, *truth->covariance);
  }
  if (truth->log_z && z.size() >= 2) {
    std::vector<Vector> zs;
    for (const double v : z) {
      zs.push_back(Vector::Constant(1, v));
    }
    s.mse_Z = aggregate_mse(zs, Vector::Constant(1, std::exp(*truth->log_z)));
  }
}

namespace detail {

using Clock = std::chrono::steady_clock;

[[nodiscard]] inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t master, std::size_t run) {
  return derive_seed(master, {static_cast<std::uint64_t>(Stream::kRun), run});
}

[[nodiscard]] inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// One config per chain: invariant target, kernel (with per-run random HMC parameters), init rule.
[[nodiscard]] inline std::vector<ChainConfig> make_chain_configs(
    const ExperimentConfig& config,
    const BuiltTarget& target,
    std::uint64_t seed,
    std::size_t iterations) {
  const auto& up = config.upper;
  const auto D = target.dimension();
  const std::size_t N = up.chains;

  std::vector<TargetDensity> invariants(N, target.posterior);
  if (up.invariant != "full") {
    if (!target.model) {
      throw ConfigError("upper.invariant = \"" + up.invariant + "\" needs a data-based target");
    }
    if (up.invariant == "tempered") {
      auto tempered = make_tempered(target.model, up.beta);
      std::fill(invariants.begin(), invariants.end(), tempered);
    } else {
      const auto data_size = target.model->data_size();
      const auto partition_seed = derive_seed(seed, {static_cast<std::uint64_t>(Stream::kPartition)});
      std::vector<std::vector<std::size_t>> subsets;
      try {
        subsets = up.subset_size == 0
                      ? partition_data(
                            data_size, N,
                            up.partition == "random" ? PartitionStrategy::kRandom : PartitionStrategy::kContiguous,
                            partition_seed)
                      : random_subsets(data_size, N, up.subset_size, partition_seed);
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      const auto mode = up.prior_mode == "split" ? PriorMode::kSplit : PriorMode::kFull;
      for (std::size_t n = 0; n < N; ++n) {
        invariants[n] = make_partial_posterior(target.model, subsets[n], mode, N, n);
      }
    }
  }

  std::function<Vector(Rng&)> sampler;
  Vector start;
  if (up.init == "point") {
    start = to_vector(up.init_state);
    if (start.size() != D) {
      throw ConfigError("upper.init_state has the wrong length");
    }
  } else if (up.init == "prior") {
    if (!target.model) {
      throw ConfigError("upper.init = \"prior\" needs a data-based target");
    }
    sampler = [model = target.model](Rng& rng) { return model->sample_prior(rng); };
  }
  if (up.init == "box" || up.init == "point") {
    Vector low = up.init_low.empty() ? target.init_low : to_vector(up.init_low);
    Vector high = up.init_high.empty() ? target.init_high : to_vector(up.init_high);
    if (low.size() == 1 && D > 1) {
      low = Vector::Constant(D, low[0]);
      high = Vector::Constant(D, high[0]);
    }
    if (low.size() != D || high.size() != D) {
      throw ConfigError("initialization box does not match the target dimension");
    }
    sampler = [low, high](Rng& rng) { return uniform_in_box(rng, low, high); };
  }

  auto param_rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kChainParameters)});
  std::vector<ChainConfig> out(N);
  for (std::size_t n = 0; n < N; ++n) {
    auto& c = out[n];
    c.target = invariants[n];
    c.iterations = iterations;
    c.init_state = start;
    c.init_sampler = sampler;
    c.seed = derive_seed(seed, {static_cast<std::uint64_t>(Stream::kChain), n});
    if (up.algorithm == "mh") {
      c.kernel = RandomWalkMh{Matrix::Identity(D, D) * up.proposal_sd * up.proposal_sd};
    } else if (up.algorithm == "hmc") {
      HmcParams p{up.step_size, static_cast<int>(up.leapfrog_steps), up.mass};
      if (up.randomize) {
        p.leapfrog_steps = std::uniform_int_distribution<int>{
            static_cast<int>(up.leapfrog_range[0]), static_cast<int>(up.leapfrog_range[1])}(param_rng);
        p.step_size = std::uniform_real_distribution<double>{up.step_range[0], up.step_range[1]}(param_rng);
      }
      try {
        p.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      c.kernel = p;
    } else {
      GibbsConfig g;
      g.inner_steps = static_cast<int>(up.inner_steps);
      g.per_coordinate_scale = up.coordinate_sd.size() == 1 ? Vector::Constant(D, up.coordinate_sd[0])
                                                            : to_vector(up.coordinate_sd);
      if (g.per_coordinate_scale.size() != D || g.inner_steps < 1) {
        throw ConfigError("upper.coordinate_sd must match the dimension and upper.inner_steps must be >= 1");
      }
      g.scan = up.scan == "random" ? ScanOrder::kRandom : ScanOrder::kAscending;
      c.kernel = g;
    }
  }
  return out;
}

inline void check_budget(const ExperimentConfig& config, const EvalLedger& ledger, std::size_t run) {
  if (!config.run.budget) {
    return;
  }
  const std::uint64_t observed = ledger.posterior_total();
  if (observed != *config.run.budget) {
    throw BudgetError(*config.run.budget, observed, "run " + std::to_string(run) + " broke the budget");
  }
}

[[nodiscard]] inline RunRecord run_lais_once(const ExperimentConfig& config, const BuiltTarget& target, std::size_t run, unsigned threads) {
  const auto& lo = config.lower;
  RunRecord rec;
  rec.run = run;
  rec.seed = run_seed(config.run.seed, run);
  rec.N = config.upper.chains;
  rec.T = config.upper.iterations;
  rec.M = lo.recycle ? 1 : lo.samples;
  rec.scheme = lo.scheme;

  auto t0 = Clock::now();
  const auto configs = make_chain_configs(config, target, rec.seed, config.upper.iterations);
  const auto records = run_parallel_chains(configs, threads);
  rec.wall.upper_ms = elapsed_ms(t0);

  EvalLedger ledger = merged_ledger(records);
  WeightedSampleSet set;
  if (lo.recycle) {
    DenominatorScheme scheme;
    scheme.kind = scheme_kind(lo.scheme);
    t0 = Clock::now();
    const TargetDensity* full = detail::chains_target_complete_posterior(config.upper) ? nullptr : &target.posterior;
    set = recycle_weighting(records, scheme, ledger, full, threads);
    rec.wall.weighting_ms = elapsed_ms(t0);
  } else {
    const auto D = target.dimension();
    const auto variance = lo.proposal_sd * lo.proposal_sd;
    const auto policy = lo.covariance == "chain" ? CovariancePolicy{} : CovariancePolicy::isotropic(D, variance);
    const auto bank = build_bank(records, policy);
    DenominatorScheme scheme;
    scheme.kind = scheme_kind(lo.scheme);
    if (scheme.kind == DenominatorKind::kCompressed) {
      if (lo.clusters > bank.size()) {
        throw ConfigError("lower.clusters exceeds the number of proposals N*T");
      }
      t0 = Clock::now();
      scheme = DenominatorScheme::compressed(std::make_shared<CompressedMixture>(compress_locations(
          bank.locations(), lo.clusters, variance,
          derive_seed(rec.seed, {static_cast<std::uint64_t>(Stream::kCompression)}),
          lo.summary == "random" ? SummaryRule::kRandomMember : SummaryRule::kClusterMean)));
      rec.wall.compression_ms = elapsed_ms(t0);
      rec.B = lo.clusters;
    }
    t0 = Clock::now();
    auto rng = make_rng(rec.seed, {static_cast<std::uint64_t>(Stream::kLowerLayer)});
    const auto samples = scheme.mixture ? draw_compressed_samples(*scheme.mixture, bank, lo.samples, rng, ledger)
                                        : draw_lower_samples(bank, lo.samples, rng, ledger);
    rec.wall.sampling_ms = elapsed_ms(t0);
    t0 = Clock::now();
    set = weight_samples(target.posterior, &bank, scheme, samples, ledger, threads);
    rec.wall.weighting_ms = elapsed_ms(t0);
  }
  rec.estimate = estimate(set);
  rec.moments = estimate_moments(set);
  rec.ledger = ledger;
  check_budget(config, ledger, run);
  return rec;
}

[[nodiscard]] inline RunRecord run_plain_once(const ExperimentConfig& config, const BuiltTarget& target, std::size_t run, unsigned threads) {
  RunRecord rec;
  rec.run = run;
  rec.seed = run_seed(config.run.seed, run);
  rec.method = "plain_mcmc";
  rec.scheme = "ergodic";
  rec.N = config.upper.chains;
  rec.T = 2 * config.upper.iterations;
  rec.has_evidence = false;

  const auto t0 = Clock::now();
  const auto records = run_parallel_chains(make_chain_configs(config, target, rec.seed, rec.T), threads);
  rec.wall.upper_ms = elapsed_ms(t0);

  const auto D = target.dimension();
  Matrix states(D, static_cast<Eigen::Index>(rec.N * rec.T));
  Eigen::Index col = 0;
  for (const auto& r : records) {
    for (std::size_t t = 1; t < r.states.size(); ++t) {
      states.col(col++) = r.states[t];
    }
  }
  MomentEstimate m;
  m.mean = states.rowwise().mean();
  const Matrix centered = states.colwise() - m.mean;
  m.covariance = centered * centered.transpose() / static_cast<double>(states.cols());
  rec.estimate.I_hat = m.mean;
  rec.estimate.count = static_cast<std::size_t>(states.cols());
  rec.estimate.scheme = rec.scheme;
  rec.estimate.log_Z_hat = std::numeric_limits<double>::quiet_NaN();
  rec.estimate.Z_hat = std::numeric_limits<double>::quiet_NaN();
  rec.estimate.ess = std::numeric_limits<double>::quiet_NaN();
  rec.moments = m;
  rec.ledger = merged_ledger(records);
  rec.estimate.evals = rec.ledger;
  check_budget(config, rec.ledger, run);
  return rec;
}

}  // namespace detail

/// Naive Monte Carlo: `Z = mean L(y | x_s)` with `x_s` drawn from the prior, in log domain.
/**
 * Returned as a weighted set with prior draws as points and the log-likelihood as log
 * weight, so the usual estimator gives both `Z` and the posterior mean.
 */
[[nodiscard]] inline WeightedSampleSet naive_mc_weights(const BayesianModel& model, std::size_t count, Rng& rng, EvalLedger& ledger) {
  if (count == 0) {
    throw ArgumentError("naive_mc_weights: need at least one sample");
  }
  WeightedSampleSet set;
  set.scheme = "prior";
  set.points.resize(model.dimension(), static_cast<Eigen::Index>(count));
  set.origins.resize(count);
  set.log_target.resize(static_cast<Eigen::Index>(count));
  set.log_denominator = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(count));
  for (std::size_t s = 0; s < count; ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    set.points.col(i) = model.sample_prior(rng);
    const double like = model.log_likelihood(set.points.col(i));
    if (std::isnan(like)) {
      throw NumericalError("naive_mc_weights: likelihood returned NaN");
    }
    set.log_target[i] = like;
    set.origins[s] = {0, s, 0};
  }
  ledger.full_posterior_evals += count;
  set.ledger = ledger;
  detail::finalize_weights(set);
  return set;
}

namespace detail {

[[nodiscard]] inline RunRecord run_naive_once(const ExperimentConfig& config, const BuiltTarget& target, std::size_t run) {
  if (!target.model) {
    throw ConfigError("run.method = \"naive_mc\" needs a data-based target with a samplable prior");
  }
  RunRecord rec;
  rec.run = run;
  rec.seed = run_seed(config.run.seed, run);
  rec.method = "naive_mc";
  rec.scheme = "prior";
  rec.N = 1;
  rec.T = config.run.naive_samples;
  rec.M = 1;
  const auto t0 = Clock::now();
  auto rng = make_rng(rec.seed, {static_cast<std::uint64_t>(Stream::kBaseline)});
  EvalLedger ledger;
  const auto set = naive_mc_weights(*target.model, config.run.naive_samples, rng, ledger);
  rec.wall.weighting_ms = elapsed_ms(t0);
  rec.estimate = estimate(set);
  if (config.target.log_shift != 0.0) {
    rec.estimate.log_Z_hat += config.target.log_shift;
    rec.estimate.Z_hat = std::exp(rec.estimate.log_Z_hat);
  }
  rec.moments = estimate_moments(set);
  rec.ledger = ledger;
  check_budget(config, ledger, run);
  return rec;
}

[[nodiscard]] inline RunResult run_all(const ExperimentConfig& config, const std::string& method) {
  config.validate();
  const auto target = make_target(config.target);
  RunResult result;
  result.config = config;
  result.config.run.method = method;
  result.dimension = target.dimension();
  result.runs.resize(config.run.runs);
  const unsigned threads = config.run.threads;
  const bool across_runs = config.run.runs > 1 && threads > 1;
  const unsigned inner = across_runs ? 1U : threads;
  parallel_for(config.run.runs, across_runs ? threads : 1U, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t r = begin; r < end; ++r) {
      if (method == "plain_mcmc") {
        result.runs[r] = run_plain_once(result.config, target, r, inner);
      } else if (method == "naive_mc") {
        result.runs[r] = run_naive_once(result.config, target, r);
      } else {
        result.runs[r] = run_lais_once(result.config, target, r, inner);
      }
    }
  });
  summarize(result, target.truth);
  return result;
}

}  // namespace detail

/// Runs every repetition of the configured method (`run.method`).
/**
 * Run `r` uses the seed `derive_seed(master, {kRun, r})`; chains, partitions, HMC
 * parameters, lower-layer draws and clustering each take their own child stream, so the
 * result is bit-identical for any `run.threads`. A configured budget is checked against
 * every run's ledger, excluding the chains' initial-state evaluations.
 */
[[nodiscard]] inline RunResult run_experiment(const ExperimentConfig& config) {
  return detail::run_all(config, config.run.method);
}

/// `N` chains of length `2T` with ergodic averages; no evidence estimate.
[[nodiscard]] inline RunResult baseline_plain_mcmc(const ExperimentConfig& config) {
  return detail::run_all(config, "plain_mcmc");
}

/// Prior-sampling estimate of `Z` with `run.naive_samples` draws.
[[nodiscard]] inline RunResult baseline_naive_mc(const ExperimentConfig& config) {
  return detail::run_all(config, "naive_mc");
}

}  // namespace lais

#endif
