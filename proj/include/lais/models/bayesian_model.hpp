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

#ifndef LAIS_MODELS_BAYESIAN_MODEL_HPP
#define LAIS_MODELS_BAYESIAN_MODEL_HPP

#include <lais/rng.hpp>
#include <lais/target.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

/**
 * \file
 * \brief Likelihood/prior models and the posterior family built on them.
 *
 * A `BayesianModel` exposes its likelihood per data subset and its prior separately, which
 * is what partial posteriors, tempered posteriors and naive Monte Carlo need.
 */

namespace lais {

/// Observations with optional covariates (e.g. time stamps).
struct DataSet {
  std::vector<double> t;
  std::vector<double> y;

  [[nodiscard]] std::size_t size() const noexcept { return y.size(); }

  void validate() const {
    if (y.empty()) {
      throw ArgumentError("DataSet: at least one observation is required");
    }
    if (!t.empty() && t.size() != y.size()) {
      throw ArgumentError("DataSet: covariates and observations differ in length");
    }
  }
};

/// Writes `index,t,y` rows. Missing covariates are written as the index.
inline void write_dataset_csv(const DataSet& data, std::ostream& out) {
  out << "index,t,y\n" << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i << ',' << (data.t.empty() ? static_cast<double>(i) : data.t[i]) << ',' << data.y[i] << '\n';
  }
}

[[nodiscard]] inline DataSet read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "index,t,y") {
    throw ArgumentError("read_dataset_csv: missing `index,t,y` header");
  }
  DataSet data;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string index;
    std::string t;
    std::string y;
    if (!std::getline(row, index, ',') || !std::getline(row, t, ',') || !std::getline(row, y)) {
      throw ArgumentError("read_dataset_csv: malformed row `" + line + "`");
    }
    data.t.push_back(std::stod(t));
    data.y.push_back(std::stod(y));
  }
  return data;
}

/// A Bayesian model `pi(x | y) = L(y | x) g(x)` whose likelihood factorizes over data subsets.
class BayesianModel {
 public:
  virtual ~BayesianModel() = default;

  [[nodiscard]] virtual Eigen::Index dimension() const = 0;
  [[nodiscard]] virtual std::size_t data_size() const = 0;

  /// Log-likelihood of the observations in `subset` (0-based indices).
  [[nodiscard]] virtual double log_likelihood(const Vector& x, std::span<const std::size_t> subset) const = 0;
  [[nodiscard]] virtual double log_prior(const Vector& x) const = 0;
  [[nodiscard]] virtual Vector sample_prior(Rng& rng) const = 0;
  [[nodiscard]] virtual std::optional<Box> prior_box() const { return std::nullopt; }

  [[nodiscard]] virtual bool has_gradient() const { return false; }
  [[nodiscard]] virtual Vector grad_log_likelihood(const Vector& /*x*/, std::span<const std::size_t> /*subset*/) const {
    throw GradientError("model has no analytic gradient");
  }
  [[nodiscard]] virtual Vector grad_log_prior(const Vector& /*x*/) const {
    throw GradientError("model has no analytic gradient");
  }

  /// Reference posterior moments and evidence, when known.
  [[nodiscard]] virtual std::optional<AnalyticTruth> truth() const { return std::nullopt; }

  [[nodiscard]] const std::vector<std::size_t>& all_indices() const {
    if (all_.size() != data_size()) {
      all_.resize(data_size());
      std::iota(all_.begin(), all_.end(), std::size_t{0});
    }
    return all_;
  }

  [[nodiscard]] double log_likelihood(const Vector& x) const { return log_likelihood(x, all_indices()); }

 private:
  mutable std::vector<std::size_t> all_;
};

/// Whether a partial posterior keeps the whole prior or the `1/N`-th power of it.
enum class PriorMode { kFull, kSplit };

/// `beta * log L(y_S | x) + prior_power * log g(x)`.
/**
 * The single density type behind complete (S = all, beta = 1), partial and tempered
 * posteriors. The additive constant is whatever the model's likelihood and prior carry.
 */
class ModelPosterior final : public LogDensity {
 public:
  ModelPosterior(
      std::shared_ptr<const BayesianModel> model,
      std::vector<std::size_t> subset,
      double beta,
      double prior_power)
      : model_{std::move(model)}, subset_{std::move(subset)}, beta_{beta}, prior_power_{prior_power} {
    (void)model_->all_indices();  // materialize before concurrent use
  }

  [[nodiscard]] Eigen::Index dimension() const override { return model_->dimension(); }

  [[nodiscard]] double log_unnorm(const Vector& x) const override {
    const double prior = model_->log_prior(x);
    if (prior == kNegInf) {
      return kNegInf;
    }
    const double like = model_->log_likelihood(x, subset_);
    if (like == kNegInf) {
      return kNegInf;
    }
    return beta_ * like + prior_power_ * prior;
  }

  [[nodiscard]] bool has_gradient() const override { return model_->has_gradient(); }

  [[nodiscard]] Vector gradient(const Vector& x) const override {
    return beta_ * model_->grad_log_likelihood(x, subset_) + prior_power_ * model_->grad_log_prior(x);
  }

  [[nodiscard]] std::optional<Box> support() const override { return model_->prior_box(); }

  [[nodiscard]] std::optional<AnalyticTruth> truth() const override {
    if (beta_ == 1.0 && prior_power_ == 1.0 && subset_.size() == model_->data_size()) {
      return model_->truth();
    }
    return std::nullopt;
  }

  [[nodiscard]] const std::vector<std::size_t>& subset() const noexcept { return subset_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] double prior_power() const noexcept { return prior_power_; }

 private:
  std::shared_ptr<const BayesianModel> model_;
  std::vector<std::size_t> subset_;
  double beta_;
  double prior_power_;
};

/// The complete posterior `L(y_tot | x) g(x)`, charged to the full-posterior counter.
[[nodiscard]] inline TargetDensity make_posterior(const std::shared_ptr<const BayesianModel>& model) {
  return TargetDensity{std::make_shared<ModelPosterior>(model, model->all_indices(), 1.0, 1.0)};
}

/// Partial posterior `L_n(y_n | x) g_n(x)` with `g_n = g` or `g_n = g^{1/parts}`.
/**
 * Evaluations are charged to `partial_posterior_evals[index]`.
 */
[[nodiscard]] inline TargetDensity make_partial_posterior(
    const std::shared_ptr<const BayesianModel>& model,
    std::vector<std::size_t> subset,
    PriorMode prior_mode,
    std::size_t parts,
    std::size_t index) {
  if (subset.empty()) {
    throw ArgumentError("make_partial_posterior: empty subset");
  }
  if (parts == 0) {
    throw ArgumentError("make_partial_posterior: number of parts must be positive");
  }
  for (const auto i : subset) {
    if (i >= model->data_size()) {
      throw ArgumentError("make_partial_posterior: subset index out of range");
    }
  }
  const double power = prior_mode == PriorMode::kFull ? 1.0 : 1.0 / static_cast<double>(parts);
  return TargetDensity{
      std::make_shared<ModelPosterior>(model, std::move(subset), 1.0, power), CounterTag::partial(index),
      /*is_full_posterior=*/false};
}

/// Geometric-path target `beta log L + log g`; `beta > 1` sharpens the posterior.
/**
 * A tempered evaluation costs as much as a complete one and is charged to the
 * full-posterior counter, but only `beta == 1` is flagged as the complete posterior.
 */
[[nodiscard]] inline TargetDensity make_tempered(const std::shared_ptr<const BayesianModel>& model, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ArgumentError("make_tempered: beta must be positive and finite");
  }
  return TargetDensity{
      std::make_shared<ModelPosterior>(model, model->all_indices(), beta, 1.0), CounterTag::full(),
      /*is_full_posterior=*/beta == 1.0};
}

/// How `partition_data` assigns observations to parts.
enum class PartitionStrategy { kContiguous, kRandom };

/// Splits `{0, ..., data_size - 1}` into `parts` disjoint sets whose sizes differ by at most one.
/**
 * The first `data_size % parts` sets get the extra element. The random strategy applies a
 * seeded permutation before the contiguous split; each set is returned sorted.
 */
[[nodiscard]] inline std::vector<std::vector<std::size_t>> partition_data(
    std::size_t data_size,
    std::size_t parts,
    PartitionStrategy strategy,
    std::uint64_t seed) {
  if (parts == 0 || parts > data_size) {
    throw ArgumentError(
        "partition_data: need 1 <= parts <= data size (" + std::to_string(parts) + " vs " +
        std::to_string(data_size) + ")");
  }
  std::vector<std::size_t> order(data_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (strategy == PartitionStrategy::kRandom) {
    auto rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kPartition)});
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out(parts);
  const std::size_t base = data_size / parts;
  const std::size_t extra = data_size % parts;
  std::size_t cursor = 0;
  for (std::size_t n = 0; n < parts; ++n) {
    const std::size_t size = base + (n < extra ? 1 : 0);
    out[n].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                  order.begin() + static_cast<std::ptrdiff_t>(cursor + size));
    std::sort(out[n].begin(), out[n].end());
    cursor += size;
  }
  return out;
}

/// `parts` independent random subsets of size `subset_size`, each drawn without replacement.
/**
 * Subsets may overlap each other; use this when `parts * subset_size` exceeds the data size.
 */
[[nodiscard]] inline std::vector<std::vector<std::size_t>> random_subsets(
    std::size_t data_size,
    std::size_t parts,
    std::size_t subset_size,
    std::uint64_t seed) {
  if (parts == 0 || subset_size == 0 || subset_size > data_size) {
    throw ArgumentError("random_subsets: need parts >= 1 and 1 <= subset size <= data size");
  }
  auto rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kPartition)});
  std::vector<std::size_t> order(data_size);
  std::vector<std::vector<std::size_t>> out(parts);
  for (auto& subset : out) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    subset.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(subset_size));
    std::sort(subset.begin(), subset.end());
  }
  return out;
}

}  // namespace lais

#endif
