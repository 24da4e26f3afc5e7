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

#ifndef LAIS_MODELS_CONJUGATE_BASIS_HPP
#define LAIS_MODELS_CONJUGATE_BASIS_HPP

#include <lais/gaussian.hpp>
#include <lais/models/bayesian_model.hpp>

#include <cmath>
#include <numbers>
#include <optional>

namespace lais {

/// Density of `|N(location, scale^2)|` on `(0, inf)`.
struct FoldedNormal {
  double location = 0.0;
  double scale = 1.0;

  [[nodiscard]] double log_pdf(double x) const {
    if (!(x > 0.0)) {
      return kNegInf;
    }
    const double a = (x - location) / scale;
    const double b = (x + location) / scale;
    const double m = std::max(-0.5 * a * a, -0.5 * b * b);
    return m + std::log(std::exp(-0.5 * a * a - m) + std::exp(-0.5 * b * b - m)) - std::log(scale) -
           0.5 * detail::kLogTwoPi;
  }

  [[nodiscard]] double sample(Rng& rng) const {
    double x = 0.0;
    while (!(x > 0.0)) {
      x = std::abs(std::normal_distribution<double>{location, scale}(rng));
    }
    return x;
  }

  [[nodiscard]] double cdf(double x) const {
    if (!(x > 0.0)) {
      return 0.0;
    }
    const double r = scale * std::numbers::sqrt2;
    return 0.5 * (std::erf((x - location) / r) + std::erf((x + location) / r));
  }
};

/// Shape of the localized basis functions.
enum class BasisKind { kGaussian, kLaplacian };

/// Linear-in-coefficients basis regression with the coefficients integrated out.
/**
 * `y = Psi(h) rho + e`, `rho ~ N(0, lambda I_M)`, `e ~ N(0, sigma_e^2 I)`. The state is
 * `x = [lambda, h, sigma_e]` and the likelihood is the closed-form marginal
 * `N(y | 0, lambda Psi Psi^T + sigma_e^2 I)`. Folded-normal priors are placed on the three
 * hyperparameters: `h ~ |N(0, 100^2)|`, `lambda ~ |N(0, 400^2)|`, `sigma_e ~ |N(1.5, 9^2)|`.
 *
 * Basis `m` is centered at the m-th point of a uniform grid on `[t_1, t_D]`; the Gaussian
 * basis is `exp(-(t - c)^2 / (2 h^2))` and the Laplacian one `exp(-|t - c| / h)`. A fixed
 * design matrix can be supplied instead, in which case `h` does not enter the likelihood.
 *
 * Likelihood and priors are normalized, so Z is the evidence `p(y | kind, M)`.
 */
class ConjugateBasisModel final : public BayesianModel {
 public:
  using BayesianModel::log_likelihood;

  ConjugateBasisModel(DataSet data, std::size_t basis_count, BasisKind kind)
      : data_{std::move(data)}, basis_count_{basis_count}, kind_{kind} {
    data_.validate();
    if (basis_count_ == 0) {
      throw ArgumentError("ConjugateBasisModel: need at least one basis function");
    }
    if (data_.t.empty()) {
      for (std::size_t i = 0; i < data_.size(); ++i) {
        data_.t.push_back(static_cast<double>(i + 1));
      }
    }
    centers_.resize(basis_count_);
    const double lo = data_.t.front();
    const double hi = data_.t.back();
    for (std::size_t m = 0; m < basis_count_; ++m) {
      centers_[m] = basis_count_ == 1 ? 0.5 * (lo + hi)
                                      : lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(basis_count_ - 1);
    }
  }

  ConjugateBasisModel(DataSet data, Matrix fixed_design) : data_{std::move(data)}, fixed_design_{std::move(fixed_design)} {
    data_.validate();
    if (fixed_design_->rows() != static_cast<Eigen::Index>(data_.size()) || fixed_design_->cols() < 1) {
      throw ArgumentError("ConjugateBasisModel: design matrix must have one row per observation");
    }
    basis_count_ = static_cast<std::size_t>(fixed_design_->cols());
  }

  static constexpr FoldedNormal kLambdaPrior{0.0, 400.0};
  static constexpr FoldedNormal kBandwidthPrior{0.0, 100.0};
  static constexpr FoldedNormal kNoisePrior{1.5, 9.0};

  [[nodiscard]] Eigen::Index dimension() const override { return 3; }
  [[nodiscard]] std::size_t data_size() const override { return data_.size(); }
  [[nodiscard]] const DataSet& data() const noexcept { return data_; }

  [[nodiscard]] double basis(double t, double center, double bandwidth) const {
    const double d = t - center;
    return kind_ == BasisKind::kGaussian ? std::exp(-0.5 * d * d / (bandwidth * bandwidth))
                                         : std::exp(-std::abs(d) / bandwidth);
  }

  /// Rows of `Psi(h)` for the observations in `subset`.
  [[nodiscard]] Matrix design(double bandwidth, std::span<const std::size_t> subset) const {
    Matrix psi(static_cast<Eigen::Index>(subset.size()), static_cast<Eigen::Index>(basis_count_));
    for (std::size_t r = 0; r < subset.size(); ++r) {
      for (std::size_t m = 0; m < basis_count_; ++m) {
        psi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)) =
            fixed_design_ ? (*fixed_design_)(static_cast<Eigen::Index>(subset[r]), static_cast<Eigen::Index>(m))
                          : basis(data_.t[subset[r]], centers_[m], bandwidth);
      }
    }
    return psi;
  }

  /// `log N(y_S | 0, lambda Psi_S Psi_S^T + sigma_e^2 I)` via a Cholesky factorization.
  /**
   * Up to three jitter levels are tried before giving up with NumericalError.
   */
  [[nodiscard]] double log_marginal_likelihood(
      double lambda,
      double bandwidth,
      double noise_sd,
      std::span<const std::size_t> subset) const {
    if (!(lambda > 0.0) || !(bandwidth > 0.0) || !(noise_sd > 0.0)) {
      throw ArgumentError("log_marginal_likelihood: hyperparameters must be positive");
    }
    const Matrix psi = design(bandwidth, subset);
    const auto n = psi.rows();
    Matrix cov = lambda * psi * psi.transpose();
    cov.diagonal().array() += noise_sd * noise_sd;
    Vector y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      y[r] = data_.y[subset[static_cast<std::size_t>(r)]];
    }
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      Matrix jittered = cov;
      jittered.diagonal().array() += jitter;
      const Eigen::LLT<Matrix> llt(jittered);
      if (llt.info() == Eigen::Success) {
        const Vector z = llt.matrixL().solve(y);
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        return -0.5 * (static_cast<double>(n) * detail::kLogTwoPi + log_det + z.squaredNorm());
      }
      jitter = jitter == 0.0 ? 1e-10 * cov.diagonal().maxCoeff() : jitter * 100.0;
    }
    throw NumericalError("log_marginal_likelihood: covariance is not positive-definite after jitter");
  }

  [[nodiscard]] double log_likelihood(const Vector& x, std::span<const std::size_t> subset) const override {
    if (!(x[0] > 0.0) || !(x[1] > 0.0) || !(x[2] > 0.0)) {
      return kNegInf;
    }
    return log_marginal_likelihood(x[0], x[1], x[2], subset);
  }

  [[nodiscard]] double log_prior(const Vector& x) const override {
    return kLambdaPrior.log_pdf(x[0]) + kBandwidthPrior.log_pdf(x[1]) + kNoisePrior.log_pdf(x[2]);
  }

  [[nodiscard]] Vector sample_prior(Rng& rng) const override {
    Vector x(3);
    x << kLambdaPrior.sample(rng), kBandwidthPrior.sample(rng), kNoisePrior.sample(rng);
    return x;
  }

  [[nodiscard]] std::optional<Box> prior_box() const override {
    Box box;
    box.low = Vector::Zero(3);
    box.high = Vector::Constant(3, std::numeric_limits<double>::infinity());
    return box;
  }

 private:
  DataSet data_;
  std::size_t basis_count_ = 0;
  BasisKind kind_ = BasisKind::kGaussian;
  std::vector<double> centers_;
  std::optional<Matrix> fixed_design_;
};

/// Synthetic series on `t = 1..count` drawn from the model with the given hyperparameters.
[[nodiscard]] inline DataSet make_conjugate_basis_dataset(
    std::uint64_t seed,
    std::size_t count,
    std::size_t basis_count,
    BasisKind kind,
    double lambda,
    double bandwidth,
    double noise_sd) {
  DataSet data;
  for (std::size_t i = 1; i <= count; ++i) {
    data.t.push_back(static_cast<double>(i));
    data.y.push_back(0.0);
  }
  const ConjugateBasisModel shape{data, basis_count, kind};
  const Matrix psi = shape.design(bandwidth, shape.all_indices());
  auto rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kData)});
  const Vector rho = std::sqrt(lambda) * standard_normal(rng, static_cast<Eigen::Index>(basis_count));
  const Vector noise = noise_sd * standard_normal(rng, static_cast<Eigen::Index>(count));
  const Vector y = psi * rho + noise;
  for (std::size_t i = 0; i < count; ++i) {
    data.y[i] = y[static_cast<Eigen::Index>(i)];
  }
  return data;
}

}  // namespace lais

#endif
