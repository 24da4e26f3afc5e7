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

#ifndef LAIS_MODELS_GAUSSIAN_MIXTURE_HPP
#define LAIS_MODELS_GAUSSIAN_MIXTURE_HPP

#include <lais/gaussian.hpp>
#include <lais/log_sum_exp.hpp>
#include <lais/target.hpp>

#include <cmath>
#include <memory>
#include <vector>

namespace lais {

/// Normalized mixture of Gaussians. The additive constant is zero, so Z = 1.
class GaussianMixture final : public LogDensity {
 public:
  GaussianMixture(std::vector<double> weights, std::vector<Vector> means, std::vector<Matrix> covariances)
      : weights_{std::move(weights)}, means_{std::move(means)} {
    if (weights_.empty() || weights_.size() != means_.size() || weights_.size() != covariances.size()) {
      throw ArgumentError("GaussianMixture: weights, means and covariances must have equal non-zero length");
    }
    double total = 0.0;
    for (const double w : weights_) {
      if (!(w > 0.0)) {
        throw ArgumentError("GaussianMixture: weights must be positive");
      }
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw ArgumentError("GaussianMixture: weights must sum to one");
    }
    const auto dim = means_.front().size();
    kernels_.reserve(covariances.size());
    for (std::size_t k = 0; k < means_.size(); ++k) {
      if (means_[k].size() != dim) {
        throw ArgumentError("GaussianMixture: inconsistent mean dimensions");
      }
      if (!covariances[k].isApprox(covariances[k].transpose(), 0.0)) {
        throw ArgumentError("GaussianMixture: covariances must be symmetric");
      }
      kernels_.emplace_back(covariances[k]);
      log_weights_.push_back(std::log(weights_[k]));
    }
  }

  [[nodiscard]] Eigen::Index dimension() const override { return means_.front().size(); }

  [[nodiscard]] double log_unnorm(const Vector& x) const override {
    Eigen::ArrayXd terms(static_cast<Eigen::Index>(kernels_.size()));
    for (std::size_t k = 0; k < kernels_.size(); ++k) {
      terms[static_cast<Eigen::Index>(k)] = log_weights_[k] + kernels_[k].log_pdf(x, means_[k]);
    }
    return log_sum_exp(terms);
  }

  [[nodiscard]] bool has_gradient() const override { return true; }

  /// Responsibility-weighted sum of the component scores.
  [[nodiscard]] Vector gradient(const Vector& x) const override {
    const auto count = static_cast<Eigen::Index>(kernels_.size());
    Eigen::ArrayXd terms(count);
    for (Eigen::Index k = 0; k < count; ++k) {
      terms[k] = log_weights_[static_cast<std::size_t>(k)] +
                 kernels_[static_cast<std::size_t>(k)].log_pdf(x, means_[static_cast<std::size_t>(k)]);
    }
    const double total = log_sum_exp(terms);
    Vector grad = Vector::Zero(x.size());
    for (Eigen::Index k = 0; k < count; ++k) {
      const auto& kernel = kernels_[static_cast<std::size_t>(k)];
      const Vector white = kernel.whiten(x - means_[static_cast<std::size_t>(k)]);
      const Vector score = -kernel.cholesky().transpose().triangularView<Eigen::Upper>().solve(white);
      grad += std::exp(terms[k] - total) * score;
    }
    return grad;
  }

  /// Mean `sum w_k nu_k` and covariance `sum w_k (Lambda_k + nu_k nu_k^T) - mean mean^T`.
  [[nodiscard]] std::optional<AnalyticTruth> truth() const override {
    const auto dim = dimension();
    Vector mean = Vector::Zero(dim);
    Matrix second = Matrix::Zero(dim, dim);
    for (std::size_t k = 0; k < means_.size(); ++k) {
      mean += weights_[k] * means_[k];
      second += weights_[k] * (kernels_[k].covariance() + means_[k] * means_[k].transpose());
    }
    return AnalyticTruth{mean, Matrix{second - mean * mean.transpose()}, 0.0};
  }

  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
  [[nodiscard]] const std::vector<Vector>& means() const noexcept { return means_; }
  [[nodiscard]] const GaussianKernel& component(std::size_t k) const { return kernels_.at(k); }

 private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<Vector> means_;
  std::vector<GaussianKernel> kernels_;
};

namespace detail {

[[nodiscard]] inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

[[nodiscard]] inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace detail

/// Isotropic normal `N(mean, sd^2 I)`.
[[nodiscard]] inline std::shared_ptr<GaussianMixture> make_gaussian(const Vector& mean, double sd) {
  const auto dim = mean.size();
  return std::make_shared<GaussianMixture>(
      std::vector<double>{1.0}, std::vector<Vector>{mean},
      std::vector<Matrix>{Matrix::Identity(dim, dim) * (sd * sd)});
}

/// The equally weighted, well-separated five-mode 2D benchmark. E[X] = [1.6, 1.4].
[[nodiscard]] inline std::shared_ptr<GaussianMixture> make_five_mode_mixture() {
  using detail::mat2;
  using detail::vec2;
  return std::make_shared<GaussianMixture>(
      std::vector<double>(5, 0.2),
      std::vector<Vector>{vec2(-10, -10), vec2(0, 16), vec2(13, 8), vec2(-9, 7), vec2(14, -14)},
      std::vector<Matrix>{
          mat2(2, 0.6, 0.6, 1), mat2(2, -0.4, -0.4, 2), mat2(2, 0.8, 0.8, 2), mat2(3, 0, 0, 0.5),
          mat2(2, -0.1, -0.1, 2)});
}

/// Two equally weighted correlated modes at [0,0] and [-4,4]; mean [-2,2], variances 8, covariance -1.
[[nodiscard]] inline std::shared_ptr<GaussianMixture> make_bimodal_mixture() {
  using detail::mat2;
  using detail::vec2;
  const Matrix cov = mat2(4, 3, 3, 4);
  return std::make_shared<GaussianMixture>(
      std::vector<double>{0.5, 0.5}, std::vector<Vector>{vec2(0, 0), vec2(-4, 4)}, std::vector<Matrix>{cov, cov});
}

/// Three isotropic modes with per-coordinate means -5, 6, 3 and standard deviation 8; E[X_j] = 4/3.
[[nodiscard]] inline std::shared_ptr<GaussianMixture> make_high_dim_mixture(Eigen::Index dim) {
  if (dim < 1) {
    throw ArgumentError("make_high_dim_mixture: dimension must be positive");
  }
  const Matrix cov = Matrix::Identity(dim, dim) * 64.0;
  return std::make_shared<GaussianMixture>(
      std::vector<double>{1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0},
      std::vector<Vector>{Vector::Constant(dim, -5.0), Vector::Constant(dim, 6.0), Vector::Constant(dim, 3.0)},
      std::vector<Matrix>{cov, cov, cov});
}

}  // namespace lais

#endif
