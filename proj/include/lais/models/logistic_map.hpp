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

#ifndef LAIS_MODELS_LOGISTIC_MAP_HPP
#define LAIS_MODELS_LOGISTIC_MAP_HPP

#include <lais/models/bayesian_model.hpp>

#include <cmath>

namespace lais {

/// Logistic map with multiplicative log-normal noise.
/**
 * `y_{k+1} = g(y_k, R, Omega) exp(eps_k)`, `g = R y_k (1 - y_k / Omega)`,
 * `eps_k ~ N(0, lambda^2)`, state `x = [R, Omega]`, uniform prior on `[0, 1e4]^2`.
 *
 * Each of the `K - 1` transitions is one datum. Its log-density is
 * `log|g / y_{k+1}| - log(y_{k+1} / g)^2 / (2 lambda^2)` and negative infinity when
 * `g <= 0`; the constant `-log(lambda sqrt(2 pi))` per transition is dropped. The prior is
 * normalized.
 */
class LogisticMapModel final : public BayesianModel {
 public:
  using BayesianModel::log_likelihood;

  LogisticMapModel(std::vector<double> trajectory, double noise_sd)
      : trajectory_{std::move(trajectory)}, noise_sd_{noise_sd} {
    if (trajectory_.size() < 2) {
      throw ArgumentError("LogisticMapModel: need at least two observations");
    }
    if (!(noise_sd_ > 0.0)) {
      throw ArgumentError("LogisticMapModel: noise standard deviation must be positive");
    }
    box_.low = Vector::Zero(2);
    box_.high = Vector::Constant(2, 1e4);
  }

  [[nodiscard]] Eigen::Index dimension() const override { return 2; }
  [[nodiscard]] std::size_t data_size() const override { return trajectory_.size() - 1; }
  [[nodiscard]] const std::vector<double>& trajectory() const noexcept { return trajectory_; }
  [[nodiscard]] double noise_sd() const noexcept { return noise_sd_; }

  [[nodiscard]] static double map(double y, double rate, double capacity) { return rate * y * (1.0 - y / capacity); }

  [[nodiscard]] double log_likelihood(const Vector& x, std::span<const std::size_t> subset) const override {
    const double rate = x[0];
    const double capacity = x[1];
    if (!(capacity > 0.0)) {
      return kNegInf;
    }
    const double inv_two_var = 0.5 / (noise_sd_ * noise_sd_);
    double total = 0.0;
    for (const auto k : subset) {
      const double g = map(trajectory_[k], rate, capacity);
      if (!(g > 0.0)) {
        return kNegInf;
      }
      const double ratio = trajectory_[k + 1] / g;
      if (!(ratio > 0.0)) {
        return kNegInf;
      }
      const double log_ratio = std::log(ratio);
      total += -log_ratio - inv_two_var * log_ratio * log_ratio;
    }
    return total;
  }

  [[nodiscard]] double log_prior(const Vector& x) const override {
    return box_.contains(x) ? -box_.log_volume() : kNegInf;
  }

  [[nodiscard]] Vector sample_prior(Rng& rng) const override { return uniform_in_box(rng, box_.low, box_.high); }
  [[nodiscard]] std::optional<Box> prior_box() const override { return box_; }

 private:
  std::vector<double> trajectory_;
  double noise_sd_;
  Box box_;
};

/// Simulates a trajectory of `length` values with `y_1 ~ U(0, 1)`.
/**
 * Draws whose path leaves the positive-density region (`g <= 0` at some step) are
 * discarded and redrawn, so the returned data always has a non-empty posterior support.
 */
[[nodiscard]] inline std::vector<double> make_logistic_trajectory(
    std::uint64_t seed,
    double noise_sd,
    std::size_t length = 20,
    double rate = 3.7,
    double capacity = 0.4) {
  auto rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kData)});
  std::normal_distribution<double> noise{0.0, noise_sd};
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<double> y{uniform01(rng)};
    bool valid = true;
    while (y.size() < length) {
      const double g = LogisticMapModel::map(y.back(), rate, capacity);
      if (!(g > 0.0)) {
        valid = false;
        break;
      }
      y.push_back(g * std::exp(noise(rng)));
    }
    if (valid) {
      return y;
    }
  }
  throw NumericalError("make_logistic_trajectory: could not simulate a valid trajectory");
}

}  // namespace lais

#endif
