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

#ifndef LAIS_LOG_SUM_EXP_HPP
#define LAIS_LOG_SUM_EXP_HPP

#include <lais/core.hpp>

#include <algorithm>
#include <cmath>
#include <span>

namespace lais {

/// `log(sum(exp(values)))` with the usual max shift.
/**
 * Returns negative infinity for an empty range or when every entry is negative infinity.
 * The reduction order depends only on the length of the input, so results are bit-stable
 * regardless of how the values were produced.
 */
[[nodiscard]] inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return kNegInf;
  }
  const Eigen::Map<const Eigen::ArrayXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  const double max = v.maxCoeff();
  if (!std::isfinite(max)) {
    return max;  // all -inf, or a +inf/NaN that must propagate
  }
  return max + std::log((v - max).exp().sum());
}

[[nodiscard]] inline double log_sum_exp(const Eigen::ArrayXd& values) {
  return log_sum_exp(std::span<const double>{values.data(), static_cast<std::size_t>(values.size())});
}

/// Log of the arithmetic mean of `exp(values)`.
[[nodiscard]] inline double log_mean_exp(std::span<const double> values) {
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

}  // namespace lais

#endif
