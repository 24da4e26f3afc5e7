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

#ifndef LAIS_MODELS_GAUSSIAN_LOCATION_HPP
#define LAIS_MODELS_GAUSSIAN_LOCATION_HPP

#include <lais/gaussian.hpp>
#include <lais/models/bayesian_model.hpp>

#include <cmath>

namespace lais {

/// Conjugate normal location model: `y_i ~ N(x, noise_sd^2)`, `x ~ N(prior_mean, prior_sd^2)`.
/**
 * Everything is normalized, so the posterior mean, variance and evidence are available in
 * closed form.
 */
class GaussianLocationModel final : public BayesianModel {
 public:
  using BayesianModel::log_likelihood;

  GaussianLocationModel(DataSet data, double noise_sd, double prior_mean, double prior_sd)
      : data_{std::move(data)}, noise_sd_{noise_sd}, prior_mean_{prior_mean}, prior_sd_{prior_sd} {
    data_.validate();
    if (!(noise_sd_ > 0.0) || !(prior_sd_ > 0.0)) {
      throw ArgumentError("GaussianLocationModel: standard deviations must be positive");
    }
  }

  [[nodiscard]] Eigen::Index dimension() const override { return 1; }
  [[nodiscard]] std::size_t data_size() const override { return data_.size(); }
  [[nodiscard]] double prior_sd() const noexcept { return prior_sd_; }
  [[nodiscard]] double prior_mean() const noexcept { return prior_mean_; }

  [[nodiscard]] double log_likelihood(const Vector& x, std::span<const std::size_t> subset) const override {
    double total = 0.0;
    for (const auto i : subset) {
      const double r = (data_.y[i] - x[0]) / noise_sd_;
      total += -0.5 * r * r - std::log(noise_sd_) - 0.5 * detail::kLogTwoPi;
    }
    return total;
  }

  [[nodiscard]] double log_prior(const Vector& x) const override {
    const double r = (x[0] - prior_mean_) / prior_sd_;
    return -0.5 * r * r - std::log(prior_sd_) - 0.5 * detail::kLogTwoPi;
  }

  [[nodiscard]] Vector sample_prior(Rng& rng) const override {
    return Vector::Constant(1, std::normal_distribution<double>{prior_mean_, prior_sd_}(rng));
  }

  [[nodiscard]] bool has_gradient() const override { return true; }

  [[nodiscard]] Vector grad_log_likelihood(const Vector& x, std::span<const std::size_t> subset) const override {
    double g = 0.0;
    for (const auto i : subset) {
      g += (data_.y[i] - x[0]) / (noise_sd_ * noise_sd_);
    }
    return Vector::Constant(1, g);
  }

  [[nodiscard]] Vector grad_log_prior(const Vector& x) const override {
    return Vector::Constant(1, -(x[0] - prior_mean_) / (prior_sd_ * prior_sd_));
  }

  /// Posterior `N(m_n, v_n)` and evidence `N(y | prior_mean 1, noise^2 I + prior_sd^2 1 1^T)`.
  [[nodiscard]] std::optional<AnalyticTruth> truth() const override {
    const auto n = static_cast<double>(data_.size());
    const double s2 = noise_sd_ * noise_sd_;
    const double t2 = prior_sd_ * prior_sd_;
    double sum = 0.0;
    for (const double y : data_.y) {
      sum += y;
    }
    const double post_var = 1.0 / (1.0 / t2 + n / s2);
    const double post_mean = post_var * (prior_mean_ / t2 + sum / s2);
    const auto count = static_cast<Eigen::Index>(data_.size());
    Matrix cov = Matrix::Constant(count, count, t2);
    cov.diagonal().array() += s2;
    const Vector y = Eigen::Map<const Vector>(data_.y.data(), count);
    const double log_z = gaussian_log_pdf(y, Vector::Constant(count, prior_mean_), cov);
    return AnalyticTruth{Vector::Constant(1, post_mean), Matrix::Constant(1, 1, post_var), log_z};
  }

 private:
  DataSet data_;
  double noise_sd_;
  double prior_mean_;
  double prior_sd_;
};

}  // namespace lais

#endif
