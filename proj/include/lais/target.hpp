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

#ifndef LAIS_TARGET_HPP
#define LAIS_TARGET_HPP

#include <lais/core.hpp>
#include <lais/eval_ledger.hpp>

#include <cmath>
#include <memory>
#include <optional>
#include <string>

/**
 * \file
 * \brief The target-density abstraction.
 *
 * A `LogDensity` is a pure, reentrant function of the state. A `TargetDensity` wraps one
 * together with the ledger counter it is charged to; every evaluation goes through the
 * handle so that evaluation budgets are exact.
 */

namespace lais {

/// Axis-aligned box `[low, high]`.
struct Box {
  Vector low;
  Vector high;

  [[nodiscard]] bool contains(const Vector& x) const {
    return (x.array() >= low.array()).all() && (x.array() <= high.array()).all();
  }
  [[nodiscard]] double log_volume() const { return (high - low).array().log().sum(); }
};

/// Closed-form (or precomputed reference) answers for a target.
struct AnalyticTruth {
  Vector mean;
  std::optional<Matrix> covariance;
  std::optional<double> log_z;
};

/// Unnormalized log-density `log pi(x)` of a model.
/**
 * Implementations return negative infinity exactly where the density is zero and document
 * the additive constant they carry relative to the normalized density.
 */
class LogDensity {
 public:
  virtual ~LogDensity() = default;

  [[nodiscard]] virtual Eigen::Index dimension() const = 0;
  [[nodiscard]] virtual double log_unnorm(const Vector& x) const = 0;

  [[nodiscard]] virtual bool has_gradient() const { return false; }
  [[nodiscard]] virtual Vector gradient(const Vector& /*x*/) const {
    throw GradientError("density has no analytic gradient");
  }

  [[nodiscard]] virtual std::optional<Box> support() const { return std::nullopt; }
  [[nodiscard]] virtual std::optional<AnalyticTruth> truth() const { return std::nullopt; }
};

/// Adds a constant to another density; the result is `c * pi(x)` with `log c = shift`.
class ShiftedDensity final : public LogDensity {
 public:
  ShiftedDensity(std::shared_ptr<const LogDensity> base, double log_shift)
      : base_{std::move(base)}, log_shift_{log_shift} {}

  [[nodiscard]] Eigen::Index dimension() const override { return base_->dimension(); }
  [[nodiscard]] double log_unnorm(const Vector& x) const override { return base_->log_unnorm(x) + log_shift_; }
  [[nodiscard]] bool has_gradient() const override { return base_->has_gradient(); }
  [[nodiscard]] Vector gradient(const Vector& x) const override { return base_->gradient(x); }
  [[nodiscard]] std::optional<Box> support() const override { return base_->support(); }
  [[nodiscard]] std::optional<AnalyticTruth> truth() const override {
    auto t = base_->truth();
    if (t && t->log_z) {
      *t->log_z += log_shift_;
    }
    return t;
  }

 private:
  std::shared_ptr<const LogDensity> base_;
  double log_shift_;
};

/// Counted handle to a density.
class TargetDensity {
 public:
  TargetDensity() = default;

  explicit TargetDensity(
      std::shared_ptr<const LogDensity> density,
      CounterTag tag = CounterTag::full(),
      bool is_full_posterior = true)
      : density_{std::move(density)}, tag_{tag}, is_full_posterior_{is_full_posterior} {
    if (!density_) {
      throw ArgumentError("TargetDensity: null density");
    }
  }

  [[nodiscard]] Eigen::Index dimension() const { return density_->dimension(); }
  [[nodiscard]] CounterTag tag() const noexcept { return tag_; }
  [[nodiscard]] const LogDensity& density() const noexcept { return *density_; }
  [[nodiscard]] const std::shared_ptr<const LogDensity>& shared_density() const noexcept { return density_; }

  /// Whether this handle evaluates the complete posterior (and not a partial or tempered one).
  [[nodiscard]] bool is_full_posterior() const noexcept { return is_full_posterior_; }

  /// Enables central finite differences when no analytic gradient exists.
  void set_finite_difference_fallback(bool enabled) noexcept { fd_fallback_ = enabled; }

  /// Evaluates `log pi(x)` and charges one evaluation to `ledger`.
  [[nodiscard]] double log_density(const Vector& x, EvalLedger& ledger) const {
    if (x.size() != dimension()) {
      throw ArgumentError(
          "log_density: expected dimension " + std::to_string(dimension()) + ", got " + std::to_string(x.size()));
    }
    const double value = density_->log_unnorm(x);
    ledger.count(tag_);
    if (std::isnan(value)) {
      throw NumericalError("log_density: density returned NaN");
    }
    return value;
  }

  /// Gradient of `log pi`; analytic when available, central differences otherwise.
  /**
   * The finite-difference route uses the step `1e-5 * (1 + |x_j|)` and charges its `2 D`
   * density evaluations to this handle's counter. Analytic gradients are charged to
   * `gradient_evals`.
   */
  [[nodiscard]] Vector gradient(const Vector& x, EvalLedger& ledger) const {
    if (x.size() != dimension()) {
      throw ArgumentError("gradient: dimension mismatch");
    }
    if (const auto box = density_->support(); box && !box->contains(x)) {
      throw GradientError("gradient: point outside the support");
    }
    if (density_->has_gradient()) {
      ++ledger.gradient_evals;
      Vector g = density_->gradient(x);
      if (!g.allFinite()) {
        throw GradientError("gradient: non-finite value");
      }
      return g;
    }
    if (!fd_fallback_) {
      throw GradientError("gradient: no analytic gradient and finite differences disabled");
    }
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = 1e-5 * (1.0 + std::abs(x[j]));
      probe[j] = x[j] + h;
      const double up = log_density(probe, ledger);
      probe[j] = x[j] - h;
      const double down = log_density(probe, ledger);
      probe[j] = x[j];
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw GradientError("gradient: finite-difference stencil touches a zero-density point");
      }
      g[j] = (up - down) / (2.0 * h);
    }
    return g;
  }

 private:
  std::shared_ptr<const LogDensity> density_;
  CounterTag tag_{};
  bool is_full_posterior_ = true;
  bool fd_fallback_ = true;
};

}  // namespace lais

#endif
