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

#ifndef LAIS_CORE_HPP
#define LAIS_CORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

/**
 * \file
 * \brief Shared vocabulary types and the exception hierarchy.
 */

namespace lais {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed an argument that violates a precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or non positive-definite quantities where a finite one is required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A gradient was requested at a point of zero density.
class GradientError : public Error {
 public:
  using Error::Error;
};

/// A chain could not find an initial state with positive density.
class InitError : public Error {
 public:
  InitError(std::size_t chain, const std::string& what)
      : Error("chain " + std::to_string(chain) + ": " + what), chain_{chain} {}

  [[nodiscard]] std::size_t chain() const noexcept { return chain_; }

 private:
  std::size_t chain_;
};

/// Every importance weight of a sample set is zero.
class DegenerateWeightsError : public Error {
 public:
  DegenerateWeightsError(double max_log_weight, std::size_t zero_count, std::size_t count)
      : Error(
            "degenerate weights: " + std::to_string(zero_count) + " of " + std::to_string(count) +
            " weights are zero, max log-weight " + std::to_string(max_log_weight)),
        max_log_weight_{max_log_weight},
        zero_count_{zero_count} {}

  [[nodiscard]] double max_log_weight() const noexcept { return max_log_weight_; }
  [[nodiscard]] std::size_t zero_count() const noexcept { return zero_count_; }

 private:
  double max_log_weight_;
  std::size_t zero_count_;
};

/// Observed evaluation counts differ from the configured budget.
class BudgetError : public Error {
 public:
  BudgetError(std::uint64_t expected, std::uint64_t observed, const std::string& what)
      : Error(what + ": expected " + std::to_string(expected) + " posterior evaluations, observed " +
              std::to_string(observed)),
        expected_{expected},
        observed_{observed} {}

  [[nodiscard]] std::uint64_t expected() const noexcept { return expected_; }
  [[nodiscard]] std::uint64_t observed() const noexcept { return observed_; }

 private:
  std::uint64_t expected_;
  std::uint64_t observed_;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lais

#endif
