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

#ifndef LAIS_LOWER_LAYER_HPP
#define LAIS_LOWER_LAYER_HPP

#include <lais/compression.hpp>
#include <lais/gaussian.hpp>
#include <lais/log_sum_exp.hpp>
#include <lais/parallel.hpp>
#include <lais/target.hpp>
#include <lais/upper_layer.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief Proposal bank, multiple importance sampling weights and the estimators.
 *
 * The bank holds one Gaussian proposal per chain and time step. Denominators are mixtures
 * over subsets of the bank and are evaluated in log domain. Each chain's locations are
 * stored whitened by that chain's kernel, so a mixture term is `c_n - |y_n - w|^2 / 2`
 * with `y_n` the whitened sample.
 */

namespace lais {

/// Which mixture forms the weight denominator.
enum class DenominatorKind { kStandard, kSpatial, kTemporal, kComplete, kCompressed };

[[nodiscard]] inline std::string_view to_string(DenominatorKind kind) {
  switch (kind) {
    case DenominatorKind::kStandard:
      return "standard";
    case DenominatorKind::kSpatial:
      return "spatial";
    case DenominatorKind::kTemporal:
      return "temporal";
    case DenominatorKind::kComplete:
      return "complete";
    case DenominatorKind::kCompressed:
      return "compressed";
  }
  return "unknown";
}

[[nodiscard]] inline DenominatorKind parse_denominator(std::string_view name) {
  for (const auto kind : {DenominatorKind::kStandard, DenominatorKind::kSpatial, DenominatorKind::kTemporal,
                          DenominatorKind::kComplete, DenominatorKind::kCompressed}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  throw ArgumentError("unknown denominator scheme `" + std::string{name} + "`");
}

/// A denominator kind plus, for the compressed kind, the mixture it uses.
struct DenominatorScheme {
  DenominatorKind kind = DenominatorKind::kComplete;
  std::shared_ptr<const CompressedMixture> mixture;

  [[nodiscard]] static DenominatorScheme standard() { return {DenominatorKind::kStandard, nullptr}; }
  [[nodiscard]] static DenominatorScheme spatial() { return {DenominatorKind::kSpatial, nullptr}; }
  [[nodiscard]] static DenominatorScheme temporal() { return {DenominatorKind::kTemporal, nullptr}; }
  [[nodiscard]] static DenominatorScheme complete() { return {DenominatorKind::kComplete, nullptr}; }
  [[nodiscard]] static DenominatorScheme compressed(std::shared_ptr<const CompressedMixture> mix) {
    if (!mix) {
      throw ArgumentError("DenominatorScheme: compressed scheme needs a mixture");
    }
    return {DenominatorKind::kCompressed, std::move(mix)};
  }

  [[nodiscard]] std::string name() const { return std::string{to_string(kind)}; }
};

/// Covariance of the lower-layer proposals: one shared matrix or one per chain.
struct CovariancePolicy {
  std::vector<Matrix> covariances;

  [[nodiscard]] static CovariancePolicy isotropic(Eigen::Index dim, double variance) {
    return {{Matrix::Identity(dim, dim) * variance}};
  }
  [[nodiscard]] static CovariancePolicy shared(Matrix cov) { return {{std::move(cov)}}; }
  [[nodiscard]] static CovariancePolicy per_chain(std::vector<Matrix> covs) { return {std::move(covs)}; }
};

/// The `N x T` Gaussian proposals `q_{n,t}(x) = N(x | mu_{n,t}, C_n)`.
class ProposalBank {
 public:
  using RowArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// `locations` is D x (N T), chain-major: column `n T + t` is `mu_{n,t}`.
  ProposalBank(Matrix locations, std::size_t chains, std::vector<GaussianKernel> kernels, std::size_t first_time = 1)
      : locations_{std::move(locations)}, chains_{chains}, kernels_{std::move(kernels)}, first_time_{first_time} {
    if (chains_ == 0 || locations_.cols() == 0 || static_cast<std::size_t>(locations_.cols()) % chains_ != 0) {
      throw ArgumentError("ProposalBank: location count must be a positive multiple of the chain count");
    }
    if (kernels_.size() != 1 && kernels_.size() != chains_) {
      throw ArgumentError("ProposalBank: need one shared kernel or one kernel per chain");
    }
    for (const auto& k : kernels_) {
      if (k.dimension() != locations_.rows()) {
        throw ArgumentError("ProposalBank: kernel dimension does not match the locations");
      }
    }
    steps_ = static_cast<std::size_t>(locations_.cols()) / chains_;
    whitened_.resize(locations_.rows(), locations_.cols());
    const auto T = static_cast<Eigen::Index>(steps_);
    for (std::size_t n = 0; n < chains_; ++n) {
      whitened_.middleCols(static_cast<Eigen::Index>(n) * T, T) =
          kernel(n).whiten_columns(locations_.middleCols(static_cast<Eigen::Index>(n) * T, T)).array();
    }
  }

  [[nodiscard]] std::size_t chains() const noexcept { return chains_; }
  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] std::size_t size() const noexcept { return chains_ * steps_; }
  [[nodiscard]] Eigen::Index dimension() const noexcept { return locations_.rows(); }
  /// Time label of column 0 of each chain: 1 when `mu_0` is excluded, 0 when included.
  [[nodiscard]] std::size_t first_time() const noexcept { return first_time_; }
  [[nodiscard]] bool shared_kernel() const noexcept { return kernels_.size() == 1; }
  [[nodiscard]] const GaussianKernel& kernel(std::size_t n) const { return kernels_[shared_kernel() ? 0 : n]; }
  [[nodiscard]] const Matrix& locations() const noexcept { return locations_; }
  [[nodiscard]] Eigen::Index column(std::size_t n, std::size_t t) const {
    return static_cast<Eigen::Index>(n * steps_ + t);
  }
  [[nodiscard]] Vector location(std::size_t n, std::size_t t) const { return locations_.col(column(n, t)); }
  [[nodiscard]] const RowArray& whitened() const noexcept { return whitened_; }

 private:
  Matrix locations_;
  std::size_t chains_;
  std::size_t steps_ = 0;
  std::vector<GaussianKernel> kernels_;
  std::size_t first_time_;
  RowArray whitened_;
};

/// Builds the bank from chain states.
/**
 * With `include_initial_state` the locations are `mu_{n,0..T-1}`, otherwise
 * `mu_{n,1..T}`. An empty covariance policy uses each chain's random-walk covariance.
 */
[[nodiscard]] inline ProposalBank build_bank(
    const std::vector<ChainRecord>& records,
    const CovariancePolicy& policy,
    bool include_initial_state = false) {
  if (records.empty()) {
    throw ArgumentError("build_bank: no chain records");
  }
  const auto dim = records.front().dimension();
  const auto T = records.front().iterations();
  for (const auto& rec : records) {
    if (rec.dimension() != dim || rec.iterations() != T || rec.states.size() != T + 1) {
      throw ArgumentError("build_bank: records differ in dimension or length");
    }
  }
  Matrix locations(dim, static_cast<Eigen::Index>(records.size() * T));
  const std::size_t offset = include_initial_state ? 0 : 1;
  for (std::size_t n = 0; n < records.size(); ++n) {
    for (std::size_t t = 0; t < T; ++t) {
      locations.col(static_cast<Eigen::Index>(n * T + t)) = records[n].states[t + offset];
    }
  }
  std::vector<GaussianKernel> kernels;
  if (policy.covariances.empty()) {
    for (const auto& rec : records) {
      if (rec.proposal_covariance.size() == 0) {
        throw ArgumentError("build_bank: chain has no random-walk covariance to reuse");
      }
      kernels.emplace_back(rec.proposal_covariance);
    }
  } else {
    for (const auto& cov : policy.covariances) {
      kernels.emplace_back(cov);
    }
  }
  return ProposalBank{std::move(locations), records.size(), std::move(kernels), offset};
}

/// Where a lower-layer sample came from: chain, bank column within the chain, replicate.
struct SampleOrigin {
  std::size_t n = 0;
  std::size_t t = 0;
  std::size_t m = 0;
};

struct LowerSamples {
  Matrix points;  ///< D x count.
  std::vector<SampleOrigin> origins;
};

/// Draws `M` samples from every proposal, ordered by chain, then time, then replicate.
[[nodiscard]] inline LowerSamples draw_lower_samples(const ProposalBank& bank, std::size_t M, Rng& rng, EvalLedger& ledger) {
  if (M < 1) {
    throw ArgumentError("draw_lower_samples: M must be at least 1");
  }
  LowerSamples out;
  out.points.resize(bank.dimension(), static_cast<Eigen::Index>(bank.size() * M));
  out.origins.reserve(bank.size() * M);
  Eigen::Index col = 0;
  for (std::size_t n = 0; n < bank.chains(); ++n) {
    const auto& k = bank.kernel(n);
    for (std::size_t t = 0; t < bank.steps(); ++t) {
      const Vector mu = bank.location(n, t);
      for (std::size_t m = 0; m < M; ++m) {
        out.points.col(col++) = k.sample(mu, rng);
        out.origins.push_back({n, t, m});
      }
    }
  }
  ledger.lower_draws += bank.size() * M;
  return out;
}

/// Same count and origin layout as `draw_lower_samples`, but every point is drawn from `q_B`.
[[nodiscard]] inline LowerSamples draw_compressed_samples(
    const CompressedMixture& mix,
    const ProposalBank& bank,
    std::size_t M,
    Rng& rng,
    EvalLedger& ledger) {
  if (M < 1) {
    throw ArgumentError("draw_compressed_samples: M must be at least 1");
  }
  LowerSamples out;
  out.points = draw_from_compressed(mix, bank.size() * M, rng);
  out.origins.reserve(bank.size() * M);
  for (std::size_t n = 0; n < bank.chains(); ++n) {
    for (std::size_t t = 0; t < bank.steps(); ++t) {
      for (std::size_t m = 0; m < M; ++m) {
        out.origins.push_back({n, t, m});
      }
    }
  }
  ledger.lower_draws += bank.size() * M;
  return out;
}

/// Proposal evaluations one denominator costs; `own_term_known` drops the sample's own proposal.
[[nodiscard]] inline std::uint64_t denominator_cost(
    const DenominatorScheme& scheme,
    std::size_t chains,
    std::size_t steps,
    bool own_term_known) {
  const std::uint64_t own = own_term_known ? 1 : 0;
  switch (scheme.kind) {
    case DenominatorKind::kStandard:
      return 1 - own;
    case DenominatorKind::kSpatial:
      return chains - own;
    case DenominatorKind::kTemporal:
      return steps - own;
    case DenominatorKind::kComplete:
      return chains * steps - own;
    case DenominatorKind::kCompressed:
      return scheme.mixture ? scheme.mixture->components() : 0;
  }
  return 0;
}

namespace detail {

/// Evaluates denominators with reusable scratch space. Not thread-safe; use one per worker.
class DenominatorEvaluator {
 public:
  DenominatorEvaluator(const DenominatorScheme& scheme, const ProposalBank* bank) : scheme_{scheme}, bank_{bank} {
    if (scheme_.kind == DenominatorKind::kCompressed) {
      if (!scheme_.mixture) {
        throw ArgumentError("compressed denominator without a mixture");
      }
      terms_.resize(static_cast<Eigen::Index>(scheme_.mixture->components()));
    } else {
      if (bank_ == nullptr) {
        throw ArgumentError("denominator needs a proposal bank");
      }
      y_.resize(bank_->shared_kernel() ? 1 : bank_->chains());
      terms_.resize(static_cast<Eigen::Index>(bank_->size()));
    }
  }

  /// `log Phi(x)` for a sample from proposal `(n, t)`; `own` replaces the sample's own term when given.
  [[nodiscard]] double operator()(const Vector& x, std::size_t n, std::size_t t, std::optional<double> own = {}) {
    if (scheme_.kind == DenominatorKind::kCompressed) {
      const auto& mix = *scheme_.mixture;
      const Vector y = mix.kernel().whiten(x);
      auto terms = terms_.head(static_cast<Eigen::Index>(mix.components()));
      terms.setZero();
      for (Eigen::Index j = 0; j < y.size(); ++j) {
        terms += (mix.whitened().row(j).transpose() - y[j]).square();
      }
      terms = mix.log_weights() + (mix.kernel().log_normalizer() - 0.5 * terms);
      return reduce(mix.components(), 1.0);
    }
    const auto& bank = *bank_;
    if (n >= bank.chains() || t >= bank.steps()) {
      throw ArgumentError("eval_denominator: origin out of range");
    }
    const std::size_t N = bank.chains();
    const std::size_t T = bank.steps();
    for (std::size_t k = 0; k < y_.size(); ++k) {
      y_[k] = bank.kernel(k).whiten(x);
    }
    switch (scheme_.kind) {
      case DenominatorKind::kStandard:
        terms_[0] = term(n, bank.column(n, t));
        if (own) {
          terms_[0] = *own;
        }
        return reduce(1, 1.0);
      case DenominatorKind::kSpatial:
        for (std::size_t i = 0; i < N; ++i) {
          terms_[static_cast<Eigen::Index>(i)] = term(i, bank.column(i, t));
        }
        if (own) {
          terms_[static_cast<Eigen::Index>(n)] = *own;
        }
        return reduce(N, static_cast<double>(N));
      case DenominatorKind::kTemporal:
        fill(n, n * T, T, 0);
        if (own) {
          terms_[static_cast<Eigen::Index>(t)] = *own;
        }
        return reduce(T, static_cast<double>(T));
      case DenominatorKind::kComplete:
        if (bank.shared_kernel()) {
          fill(0, 0, N * T, 0);
        } else {
          for (std::size_t i = 0; i < N; ++i) {
            fill(i, i * T, T, i * T);
          }
        }
        if (own) {
          terms_[bank.column(n, t)] = *own;
        }
        return reduce(N * T, static_cast<double>(N * T));
      case DenominatorKind::kCompressed:
        break;
    }
    return kNegInf;
  }

 private:
  [[nodiscard]] const Vector& y_for(std::size_t chain) const { return y_[y_.size() == 1 ? 0 : chain]; }

  /// One mixture term, with the same operation sequence as `fill`.
  [[nodiscard]] double term(std::size_t chain, Eigen::Index col) const {
    const auto& y = y_for(chain);
    const auto& w = bank_->whitened();
    double s = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      const double d = w(j, col) - y[j];
      s += d * d;
    }
    return bank_->kernel(chain).log_normalizer() - 0.5 * s;
  }

  /// Terms for `count` consecutive bank columns starting at `col`, all using `chain`'s kernel.
  void fill(std::size_t chain, std::size_t col, std::size_t count, std::size_t out_offset) {
    const auto& y = y_for(chain);
    const auto& w = bank_->whitened();
    auto out = terms_.segment(static_cast<Eigen::Index>(out_offset), static_cast<Eigen::Index>(count));
    out.setZero();
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      out += (w.row(j).segment(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(count)).transpose() - y[j])
                 .square();
    }
    out = bank_->kernel(chain).log_normalizer() - 0.5 * out;
  }

  [[nodiscard]] double reduce(std::size_t count, double divisor) const {
    const double lse = log_sum_exp(std::span<const double>{terms_.data(), count});
    return divisor == 1.0 ? lse : lse - std::log(divisor);
  }

  const DenominatorScheme& scheme_;
  const ProposalBank* bank_;
  std::vector<Vector> y_;
  Eigen::ArrayXd terms_;
};

}  // namespace detail

/// `log Phi(x)` for a sample drawn from proposal `(n, t)` (bank column indices).
/**
 * Standard: `log q_{n,t}(x)`; spatial: `log (1/N) sum_i q_{i,t}(x)`; temporal:
 * `log (1/T) sum_tau q_{n,tau}(x)`; complete: `log (1/NT) sum_i sum_tau q_{i,tau}(x)`;
 * compressed: `log q_B(x)`. The scheme's cost is charged to `ledger.proposal_evals`.
 */
[[nodiscard]] inline double eval_denominator(
    const DenominatorScheme& scheme,
    const ProposalBank& bank,
    const Vector& x,
    std::size_t n,
    std::size_t t,
    EvalLedger& ledger) {
  detail::DenominatorEvaluator eval{scheme, &bank};
  const double value = eval(x, n, t);
  ledger.proposal_evals += denominator_cost(scheme, bank.chains(), bank.steps(), false);
  return value;
}

/// Log-denominators for a batch of samples, split over `threads` workers.
/**
 * `own_terms`, when given, supplies each sample's own proposal log-density, which then
 * is not recomputed or charged.
 */
[[nodiscard]] inline Eigen::ArrayXd eval_denominators(
    const DenominatorScheme& scheme,
    const ProposalBank* bank,
    const Matrix& points,
    const std::vector<SampleOrigin>& origins,
    EvalLedger& ledger,
    unsigned threads = 1,
    const std::vector<double>* own_terms = nullptr) {
  const auto count = static_cast<std::size_t>(points.cols());
  if (origins.size() != count || (own_terms != nullptr && own_terms->size() != count)) {
    throw ArgumentError("eval_denominators: inconsistent sample metadata");
  }
  Eigen::ArrayXd out(static_cast<Eigen::Index>(count));
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    detail::DenominatorEvaluator eval{scheme, bank};
    for (std::size_t s = begin; s < end; ++s) {
      const auto& o = origins[s];
      std::optional<double> own;
      if (own_terms != nullptr) {
        own = (*own_terms)[s];
      }
      out[static_cast<Eigen::Index>(s)] = eval(points.col(static_cast<Eigen::Index>(s)), o.n, o.t, own);
    }
  });
  const std::size_t chains = bank != nullptr ? bank->chains() : 1;
  const std::size_t steps = bank != nullptr ? bank->steps() : 1;
  ledger.proposal_evals += count * denominator_cost(scheme, chains, steps, own_terms != nullptr);
  return out;
}

/// Samples with their log-weights `log pi(x) - log Phi(x)`.
struct WeightedSampleSet {
  Matrix points;
  std::vector<SampleOrigin> origins;
  Eigen::ArrayXd log_target;
  Eigen::ArrayXd log_denominator;
  Eigen::ArrayXd log_weights;
  std::string scheme;
  std::size_t first_time = 1;  ///< Time label of bank column 0, for serialization.
  std::size_t zero_count = 0;
  bool degenerate = false;
  EvalLedger ledger;  ///< Snapshot of the run's ledger once weighting finished.

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(log_weights.size()); }

  /// Normalized weights `w / sum(w)`; they sum to one up to rounding.
  [[nodiscard]] Eigen::ArrayXd normalized_weights() const { return (log_weights - log_sum_exp(log_weights)).exp(); }
};

namespace detail {

/// Fills weights and the degeneracy diagnostics; throws when every weight is zero.
inline void finalize_weights(WeightedSampleSet& set) {
  set.log_weights = set.log_target - set.log_denominator;
  for (Eigen::Index s = 0; s < set.log_weights.size(); ++s) {
    if (set.log_target[s] == kNegInf) {
      set.log_weights[s] = kNegInf;
    }
    if (std::isnan(set.log_weights[s])) {
      throw NumericalError("weight_samples: NaN log-weight");
    }
  }
  set.zero_count = static_cast<std::size_t>((set.log_weights == kNegInf).count());
  const double max = set.log_weights.size() > 0 ? set.log_weights.maxCoeff() : kNegInf;
  if (set.zero_count == set.size()) {
    throw DegenerateWeightsError(max, set.zero_count, set.size());
  }
  const double lse = log_sum_exp(set.log_weights);
  const double lse2 = log_sum_exp(Eigen::ArrayXd{2.0 * set.log_weights});
  const double ess = std::exp(2.0 * lse - lse2);
  set.degenerate = std::exp(max - lse) > 1.0 - 1e-12 && ess < 1.0 + 1e-6;
}

}  // namespace detail

/// Weights lower-layer samples against `target` (one evaluation per sample).
/**
 * Samples with zero target density keep a zero weight and stay in the count.
 */
[[nodiscard]] inline WeightedSampleSet weight_samples(
    const TargetDensity& target,
    const ProposalBank* bank,
    const DenominatorScheme& scheme,
    const LowerSamples& samples,
    EvalLedger& ledger,
    unsigned threads = 1) {
  const auto count = static_cast<std::size_t>(samples.points.cols());
  WeightedSampleSet set;
  set.points = samples.points;
  set.origins = samples.origins;
  set.scheme = scheme.name();
  set.first_time = bank != nullptr ? bank->first_time() : 1;
  set.log_target.resize(static_cast<Eigen::Index>(count));
  std::vector<EvalLedger> worker_ledgers(worker_count(count, threads));
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end, std::size_t w) {
    for (std::size_t s = begin; s < end; ++s) {
      set.log_target[static_cast<Eigen::Index>(s)] =
          target.log_density(samples.points.col(static_cast<Eigen::Index>(s)), worker_ledgers[w]);
    }
  });
  for (const auto& l : worker_ledgers) {
    ledger.merge(l);
  }
  set.log_denominator = eval_denominators(scheme, bank, samples.points, samples.origins, ledger, threads);
  detail::finalize_weights(set);
  set.ledger = ledger;
  return set;
}

/// Reuses the MH candidates `z_{n,t}` as lower-layer samples.
/**
 * Denominators are mixtures of the random-walk proposals `phi_n(. | mu_{n,tau})`,
 * `tau = 0..T-1`, where candidate `z_{n,t}` was drawn from column `t - 1`. Each sample's
 * own term is the stored `log phi_n(z_{n,t} | mu_{n,t-1})`, so the standard scheme costs
 * no proposal evaluation at all.
 *
 * Numerators are the stored target values when every chain targets the complete
 * posterior. Otherwise (partial or tempered invariants) `full_target` is evaluated at
 * every candidate, one complete-posterior evaluation each.
 */
[[nodiscard]] inline WeightedSampleSet recycle_weighting(
    const std::vector<ChainRecord>& records,
    const DenominatorScheme& scheme,
    EvalLedger& ledger,
    const TargetDensity* full_target = nullptr,
    unsigned threads = 1) {
  if (records.empty()) {
    throw ArgumentError("recycle_weighting: no chain records");
  }
  if (scheme.kind == DenominatorKind::kCompressed) {
    throw ArgumentError("recycle_weighting: candidates were not drawn from a compressed mixture");
  }
  bool stored_numerators = true;
  for (const auto& rec : records) {
    if (!rec.recyclable() || rec.candidate_log_target.size() != rec.iterations()) {
      throw ArgumentError("recycle_weighting: records lack stored random-walk proposal evaluations");
    }
    stored_numerators = stored_numerators && rec.invariant_is_full_posterior;
  }
  if (!stored_numerators && full_target == nullptr) {
    throw ArgumentError("recycle_weighting: chains target partial posteriors; a complete posterior is required");
  }
  const auto bank = build_bank(records, CovariancePolicy{}, /*include_initial_state=*/true);
  const std::size_t N = bank.chains();
  const std::size_t T = bank.steps();

  LowerSamples samples;
  samples.points.resize(bank.dimension(), static_cast<Eigen::Index>(N * T));
  samples.origins.reserve(N * T);
  std::vector<double> own(N * T);
  WeightedSampleSet set;
  set.log_target.resize(static_cast<Eigen::Index>(N * T));
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto s = n * T + t;
      samples.points.col(static_cast<Eigen::Index>(s)) = records[n].candidates[t];
      samples.origins.push_back({n, t, 0});
      own[s] = records[n].candidate_log_proposal[t];
      set.log_target[static_cast<Eigen::Index>(s)] = records[n].candidate_log_target[t];
    }
  }
  if (!stored_numerators) {
    std::vector<EvalLedger> worker_ledgers(worker_count(N * T, threads));
    parallel_for(N * T, threads, [&](std::size_t begin, std::size_t end, std::size_t w) {
      for (std::size_t s = begin; s < end; ++s) {
        set.log_target[static_cast<Eigen::Index>(s)] =
            full_target->log_density(samples.points.col(static_cast<Eigen::Index>(s)), worker_ledgers[w]);
      }
    });
    for (const auto& l : worker_ledgers) {
      ledger.merge(l);
    }
  }
  set.log_denominator = eval_denominators(scheme, &bank, samples.points, samples.origins, ledger, threads, &own);
  set.points = std::move(samples.points);
  set.origins = std::move(samples.origins);
  set.scheme = scheme.name();
  set.first_time = 1;  // candidate z_{n,t} is reported with its own time index t
  detail::finalize_weights(set);
  set.ledger = ledger;
  return set;
}

/// Estimates from one weighted sample set.
struct EstimatorOutput {
  double log_Z_hat = kNegInf;
  double Z_hat = 0.0;
  Vector I_hat;
  double ess = 0.0;
  std::size_t count = 0;
  std::size_t zero_weights = 0;  ///< Samples with log-weight -inf; they stay in `count`.
  std::string scheme;
  bool degenerate = false;
  EvalLedger evals;
};

/// `log Z = logsumexp(log w) - log(count)`, `I = sum w f / sum w`, `ESS = (sum w)^2 / sum w^2`.
template <typename F>
[[nodiscard]] EstimatorOutput estimate(const WeightedSampleSet& set, F&& f) {
  if (set.size() == 0 || set.zero_count == set.size()) {
    throw DegenerateWeightsError(
        set.size() == 0 ? kNegInf : set.log_weights.maxCoeff(), set.zero_count, set.size());
  }
  EstimatorOutput out;
  out.count = set.size();
  out.zero_weights = set.zero_count;
  out.scheme = set.scheme;
  out.degenerate = set.degenerate;
  out.evals = set.ledger;
  const double lse = log_sum_exp(set.log_weights);
  out.log_Z_hat = lse - std::log(static_cast<double>(out.count));
  out.Z_hat = std::exp(out.log_Z_hat);
  out.ess = std::exp(2.0 * lse - log_sum_exp(Eigen::ArrayXd{2.0 * set.log_weights}));
  const Eigen::ArrayXd w = (set.log_weights - lse).exp();
  for (Eigen::Index s = 0; s < set.log_weights.size(); ++s) {
    if (w[s] == 0.0) {
      continue;
    }
    const Vector fx = f(Vector{set.points.col(s)});
    if (out.I_hat.size() == 0) {
      out.I_hat = Vector::Zero(fx.size());
    }
    out.I_hat += w[s] * fx;
  }
  return out;
}

/// Posterior-mean estimate (`f(x) = x`).
[[nodiscard]] inline EstimatorOutput estimate(const WeightedSampleSet& set) {
  return estimate(set, [](const Vector& x) { return x; });
}

/// Self-normalized mean and covariance.
struct MomentEstimate {
  Vector mean;
  Matrix covariance;
};

[[nodiscard]] inline MomentEstimate estimate_moments(const WeightedSampleSet& set) {
  const Eigen::ArrayXd w = set.normalized_weights();
  MomentEstimate out;
  out.mean = set.points * w.matrix();
  const Matrix centered = set.points.colwise() - out.mean;
  out.covariance = centered * w.matrix().asDiagonal() * centered.transpose();
  return out;
}

/// Empirical moments of `x ~ q(. | mu, C)` with `mu ~ p`, next to the convolution moments.
struct EquivalentProposalReport {
  Vector empirical_mean;
  Matrix empirical_covariance;
  Vector expected_mean;        ///< `E[M]`.
  Matrix expected_covariance;  ///< `C + Sigma_M`.
};

/// Draws `count` points from the equivalent independent proposal of a layered scheme.
[[nodiscard]] inline EquivalentProposalReport equivalent_proposal_check(
    const std::function<Vector(Rng&)>& location_sampler,
    const Vector& location_mean,
    const Matrix& location_covariance,
    const Matrix& proposal_covariance,
    std::size_t count,
    Rng& rng) {
  if (count < 2) {
    throw ArgumentError("equivalent_proposal_check: need at least two draws");
  }
  const GaussianKernel q{proposal_covariance};
  Matrix draws(location_mean.size(), static_cast<Eigen::Index>(count));
  for (std::size_t s = 0; s < count; ++s) {
    draws.col(static_cast<Eigen::Index>(s)) = q.sample(location_sampler(rng), rng);
  }
  EquivalentProposalReport out;
  out.empirical_mean = draws.rowwise().mean();
  const Matrix centered = draws.colwise() - out.empirical_mean;
  out.empirical_covariance = centered * centered.transpose() / static_cast<double>(count - 1);
  out.expected_mean = location_mean;
  out.expected_covariance = proposal_covariance + location_covariance;
  return out;
}

}  // namespace lais

#endif
