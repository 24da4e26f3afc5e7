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

#ifndef LAIS_GAUSSIAN_HPP
#define LAIS_GAUSSIAN_HPP

#include <lais/core.hpp>
#include <lais/rng.hpp>

#include <cmath>
#include <numbers>
#include <optional>

namespace lais {

namespace detail {

/// Returns sigma^2 when `cov` is exactly sigma^2 * I.
[[nodiscard]] inline std::optional<double> isotropic_variance(const Matrix& cov) {
  const double s2 = cov(0, 0);
  for (Eigen::Index j = 0; j < cov.cols(); ++j) {
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      if (cov(i, j) != (i == j ? s2 : 0.0)) {
        return std::nullopt;
      }
    }
  }
  return s2;
}

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

}  // namespace detail

/// Multivariate normal log-density.
/**
 * Isotropic covariances use the closed form directly. Anything else is factorized; a
 * covariance that is not positive-definite raises NumericalError.
 */
[[nodiscard]] inline double gaussian_log_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const auto dim = static_cast<double>(x.size());
  if (cov.rows() != x.size() || cov.cols() != x.size() || mean.size() != x.size()) {
    throw ArgumentError("gaussian_log_pdf: dimension mismatch");
  }
  if (const auto s2 = detail::isotropic_variance(cov)) {
    if (!(*s2 > 0.0)) {
      throw NumericalError("gaussian_log_pdf: covariance is not positive-definite");
    }
    return -0.5 * dim * (detail::kLogTwoPi + std::log(*s2)) - 0.5 * (x - mean).squaredNorm() / *s2;
  }
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("gaussian_log_pdf: covariance is not positive-definite");
  }
  const Vector z = llt.matrixL().solve(x - mean);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (dim * detail::kLogTwoPi + log_det) - 0.5 * z.squaredNorm();
}

/// A zero-mean Gaussian kernel with a fixed covariance, factorized once.
/**
 * Mixture denominators evaluate the same kernel at many locations. Working in whitened
 * coordinates `L^{-1} x`, where `C = L L^T`, turns every term into a squared Euclidean
 * distance.
 */
class GaussianKernel {
 public:
  GaussianKernel() = default;

  explicit GaussianKernel(Matrix covariance) : covariance_{std::move(covariance)} {
    if (covariance_.rows() == 0 || covariance_.rows() != covariance_.cols()) {
      throw ArgumentError("GaussianKernel: covariance must be a non-empty square matrix");
    }
    const auto dim = static_cast<double>(covariance_.rows());
    if (const auto s2 = detail::isotropic_variance(covariance_)) {
      if (!(*s2 > 0.0) || !std::isfinite(*s2)) {
        throw NumericalError("GaussianKernel: covariance is not positive-definite");
      }
      isotropic_sd_ = std::sqrt(*s2);
      cholesky_ = Matrix::Identity(covariance_.rows(), covariance_.cols()) * *isotropic_sd_;
      log_normalizer_ = -0.5 * dim * (detail::kLogTwoPi + std::log(*s2));
      return;
    }
    const Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("GaussianKernel: covariance is not positive-definite");
    }
    cholesky_ = llt.matrixL();
    log_normalizer_ = -0.5 * dim * detail::kLogTwoPi - cholesky_.diagonal().array().log().sum();
  }

  [[nodiscard]] static GaussianKernel isotropic(Eigen::Index dim, double variance) {
    return GaussianKernel{Matrix::Identity(dim, dim) * variance};
  }

  [[nodiscard]] Eigen::Index dimension() const noexcept { return covariance_.rows(); }
  [[nodiscard]] const Matrix& covariance() const noexcept { return covariance_; }
  [[nodiscard]] const Matrix& cholesky() const noexcept { return cholesky_; }
  [[nodiscard]] double log_normalizer() const noexcept { return log_normalizer_; }
  [[nodiscard]] bool is_isotropic() const noexcept { return isotropic_sd_.has_value(); }

  /// `L^{-1} x`.
  [[nodiscard]] Vector whiten(const Vector& x) const {
    if (isotropic_sd_) {
      return x / *isotropic_sd_;
    }
    return cholesky_.triangularView<Eigen::Lower>().solve(x);
  }

  /// Whitens every column of `points`.
  [[nodiscard]] Matrix whiten_columns(const Matrix& points) const {
    if (isotropic_sd_) {
      return points / *isotropic_sd_;
    }
    return cholesky_.triangularView<Eigen::Lower>().solve(points);
  }

  [[nodiscard]] double log_pdf(const Vector& x, const Vector& mean) const {
    return log_normalizer_ - 0.5 * whiten(x - mean).squaredNorm();
  }

  [[nodiscard]] Vector sample(const Vector& mean, Rng& rng) const {
    return mean + cholesky_ * standard_normal(rng, dimension());
  }

 private:
  Matrix covariance_;
  Matrix cholesky_;
  double log_normalizer_ = 0.0;
  std::optional<double> isotropic_sd_;
};

}  // namespace lais

#endif
