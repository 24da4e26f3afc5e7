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

#ifndef LAIS_EVAL_LEDGER_HPP
#define LAIS_EVAL_LEDGER_HPP

#include <cstddef>
#include <cstdint>
#include <map>

namespace lais {

/// Which counter a density evaluation is charged to.
struct CounterTag {
  enum class Kind { kFull, kPartial };

  Kind kind = Kind::kFull;
  std::size_t index = 0;  ///< Partial-posterior index; unused for full evaluations.

  [[nodiscard]] static constexpr CounterTag full() noexcept { return {}; }
  [[nodiscard]] static constexpr CounterTag partial(std::size_t n) noexcept { return {Kind::kPartial, n}; }
};

/// Exact evaluation counts.
/**
 * Ledgers are plain values. Each chain or worker owns one and they are merged in a fixed
 * order at synchronization points, so counts never depend on scheduling.
 *
 * Evaluations spent on the initial state of a chain are tracked in `init_evals` and are
 * not part of the evaluation budget E, which counts one evaluation per MCMC iteration.
 */
struct EvalLedger {
  std::uint64_t full_posterior_evals = 0;
  std::map<std::size_t, std::uint64_t> partial_posterior_evals;
  std::uint64_t gradient_evals = 0;
  std::uint64_t proposal_evals = 0;
  std::uint64_t init_evals = 0;
  std::uint64_t lower_draws = 0;

  void count(CounterTag tag, std::uint64_t n = 1) {
    if (tag.kind == CounterTag::Kind::kFull) {
      full_posterior_evals += n;
    } else {
      partial_posterior_evals[tag.index] += n;
    }
  }

  [[nodiscard]] std::uint64_t partial_total() const {
    std::uint64_t total = 0;
    for (const auto& [index, n] : partial_posterior_evals) {
      total += n;
    }
    return total;
  }

  /// Full plus partial posterior evaluations: the budget currency E.
  [[nodiscard]] std::uint64_t posterior_total() const { return full_posterior_evals + partial_total(); }

  EvalLedger& merge(const EvalLedger& other) {
    full_posterior_evals += other.full_posterior_evals;
    for (const auto& [index, n] : other.partial_posterior_evals) {
      partial_posterior_evals[index] += n;
    }
    gradient_evals += other.gradient_evals;
    proposal_evals += other.proposal_evals;
    init_evals += other.init_evals;
    lower_draws += other.lower_draws;
    return *this;
  }

  friend bool operator==(const EvalLedger&, const EvalLedger&) = default;
};

}  // namespace lais

#endif
