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

#ifndef LAIS_MODELS_REGRESSION_HPP
#define LAIS_MODELS_REGRESSION_HPP

#include <lais/gaussian.hpp>
#include <lais/models/bayesian_model.hpp>

#include <cmath>
#include <numbers>

namespace lais {

/// Damped sinusoid `y_i = exp(-alpha t_i) sin(beta t_i) + v_i`, `v_i ~ N(0, noise_sd^2)`.
/**
 * State `x = [alpha, beta]` with a uniform prior on `[0,10] x [0,2 pi]`. Likelihood and
 * prior are fully normalized, so the posterior's additive constant is zero and Z is the
 * evidence.
 */
class RegressionModel final : public BayesianModel {
 public:
  using BayesianModel::log_likelihood;

  RegressionModel(DataSet data, double noise_sd) : data_{std::move(data)}, noise_sd_{noise_sd} {
    data_.validate();
    if (data_.t.empty()) {
      throw ArgumentError("RegressionModel: time stamps are required");
    }
    if (!(noise_sd_ > 0.0)) {
      throw ArgumentError("RegressionModel: noise standard deviation must be positive");
    }
    box_.low = Vector::Zero(2);
    box_.high = Vector(2);
    box_.high << 10.0, 2.0 * std::numbers::pi;
  }

  [[nodiscard]] Eigen::Index dimension() const override { return 2; }
  [[nodiscard]] std::size_t data_size() const override { return data_.size(); }
  [[nodiscard]] const DataSet& data() const noexcept { return data_; }
  [[nodiscard]] double noise_sd() const noexcept { return noise_sd_; }

  [[nodiscard]] static double mean_response(double alpha, double beta, double t) {
    return std::exp(-alpha * t) * std::sin(beta * t);
  }

  [[nodiscard]] double log_likelihood(const Vector& x, std::span<const std::size_t> subset) const override {
    const double norm = -std::log(noise_sd_) - 0.5 * detail::kLogTwoPi;
    double total = 0.0;
    for (const auto i : subset) {
      const double r = (data_.y[i] - mean_response(x[0], x[1], data_.t[i])) / noise_sd_;
      total += norm - 0.5 * r * r;
    }
    return total;
  }

  [[nodiscard]] double log_prior(const Vector& x) const override {
    return box_.contains(x) ? -box_.log_volume() : kNegInf;
  }

  [[nodiscard]] Vector sample_prior(Rng& rng) const override { return uniform_in_box(rng, box_.low, box_.high); }
  [[nodiscard]] std::optional<Box> prior_box() const override { return box_; }

  [[nodiscard]] bool has_gradient() const override { return true; }

  [[nodiscard]] Vector grad_log_likelihood(const Vector& x, std::span<const std::size_t> subset) const override {
    Vector g = Vector::Zero(2);
    const double s2 = noise_sd_ * noise_sd_;
    for (const auto i : subset) {
      const double t = data_.t[i];
      const double decay = std::exp(-x[0] * t);
      const double f = decay * std::sin(x[1] * t);
      const double r = (data_.y[i] - f) / s2;
      g[0] += r * (-t * f);
      g[1] += r * (t * decay * std::cos(x[1] * t));
    }
    return g;
  }

  [[nodiscard]] Vector grad_log_prior(const Vector& /*x*/) const override { return Vector::Zero(2); }

 private:
  DataSet data_;
  double noise_sd_;
  Box box_;
};

/// Synthetic data: `count` observations at `t_i = 0.2 i`, `i = 1..count`.
[[nodiscard]] inline DataSet make_regression_dataset(
    std::uint64_t seed,
    std::size_t count = 50,
    double alpha = 0.1,
    double beta = 2.0,
    double noise_sd = 0.1) {
  auto rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kData)});
  std::normal_distribution<double> noise{0.0, noise_sd};
  DataSet data;
  for (std::size_t i = 1; i <= count; ++i) {
    const double t = 0.2 * static_cast<double>(i);
    data.t.push_back(t);
    data.y.push_back(RegressionModel::mean_response(alpha, beta, t) + noise(rng));
  }
  return data;
}

}  // namespace lais

#endif
