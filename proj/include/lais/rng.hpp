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

#ifndef LAIS_RNG_HPP
#define LAIS_RNG_HPP

#include <lais/core.hpp>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lais {

using Rng = std::mt19937_64;

/// Stream labels, so that independent consumers of one run seed never share a stream.
enum class Stream : std::uint64_t {
  kChain = 1,
  kLowerLayer = 2,
  kPartition = 3,
  kChainParameters = 4,
  kCompression = 5,
  kRun = 6,
  kData = 7,
  kBaseline = 8,
};

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// Derives a child seed from a parent seed and a path of counters.
/**
 * The derivation is a pure function of its inputs, so stream `(master, k)` is the same
 * no matter which thread consumes it or in which order streams are created.
 */
[[nodiscard]] constexpr std::uint64_t derive_seed(
    std::uint64_t master,
    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = mix64(master);
  for (const auto counter : path) {
    state = mix64(state ^ mix64(counter + 0x632be59bd9b4e019ULL));
  }
  return state;
}

[[nodiscard]] inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(master, path)};
}

[[nodiscard]] inline Vector standard_normal(Rng& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal;
  Vector out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    out[i] = normal(rng);
  }
  return out;
}

[[nodiscard]] inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

/// Uniform draw from the axis-aligned box `[low, high]`.
[[nodiscard]] inline Vector uniform_in_box(Rng& rng, const Vector& low, const Vector& high) {
  Vector out(low.size());
  for (Eigen::Index i = 0; i < low.size(); ++i) {
    out[i] = std::uniform_real_distribution<double>{low[i], high[i]}(rng);
  }
  return out;
}

}  // namespace lais

#endif
