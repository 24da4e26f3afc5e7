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

#ifndef LAIS_HARNESS_CONFIG_HPP
#define LAIS_HARNESS_CONFIG_HPP

#include <lais/core.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

/**
 * \file
 * Experiment configuration.
 *
 * The file format is a subset of TOML: `[section]` headers, `key = value` lines and `#`
 * comments. Values are booleans, integers, floats, double-quoted strings, or flat arrays
 * of numbers. Four sections are recognised: `target`, `upper`, `lower` and `run`.
 *
 *     [target]
 *     name = "five_mode"
 *
 *     [upper]
 *     algorithm = "mh"
 *     chains = 100
 *     iterations = 100
 *     proposal_sd = 5.0
 *     init_low = [-4, -4]
 *     init_high = [4, 4]
 *
 *     [lower]
 *     samples = 9
 *     proposal_sd = 5.0
 *     scheme = "complete"
 *
 *     [run]
 *     runs = 20
 *     seed = 1
 */

namespace lais {

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

/// Parsed `section -> key -> value` table with typed, error-reporting accessors.
class ConfigTable {
 public:
  using Section = std::map<std::string, ConfigValue, std::less<>>;

  [[nodiscard]] static ConfigTable parse(std::string_view text, const std::string& source = "<config>") {
    ConfigTable table;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string{text}};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = trim(strip_comment(raw));
      if (line.empty()) {
        continue;
      }
      const auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ConfigError(where() + "unterminated section header");
        }
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) {
          throw ConfigError(where() + "empty section name");
        }
        table.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(where() + "expected 'key = value'");
      }
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) {
        throw ConfigError(where() + "missing key");
      }
      auto& entries = table.sections_[section];
      if (entries.contains(key)) {
        throw ConfigError(where() + "duplicate key '" + key + "'");
      }
      try {
        entries.emplace(key, parse_value(trim(line.substr(eq + 1))));
      } catch (const ConfigError& e) {
        throw ConfigError(where() + e.what());
      }
    }
    return table;
  }

  [[nodiscard]] static ConfigTable load(const std::string& path) {
    std::ifstream in{path};
    if (!in) {
      throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
  }

  [[nodiscard]] bool has(std::string_view section, std::string_view key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.contains(key);
  }

  [[nodiscard]] bool has_section(std::string_view section) const { return sections_.contains(section); }

  [[nodiscard]] const std::map<std::string, Section, std::less<>>& sections() const noexcept { return sections_; }

  void set(const std::string& section, const std::string& key, ConfigValue value) {
    sections_[section][key] = std::move(value);
  }

  [[nodiscard]] std::string get_string(std::string_view section, std::string_view key, std::optional<std::string> fallback = {}) const {
    const auto* v = find(section, key);
    if (v == nullptr) {
      return require(fallback, section, key);
    }
    if (const auto* s = std::get_if<std::string>(v)) {
      return *s;
    }
    throw type_error(section, key, "a string");
  }

  [[nodiscard]] double get_double(std::string_view section, std::string_view key, std::optional<double> fallback = {}) const {
    const auto* v = find(section, key);
    if (v == nullptr) {
      return require(fallback, section, key);
    }
    if (const auto* d = std::get_if<double>(v)) {
      return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(v)) {
      return static_cast<double>(*i);
    }
    throw type_error(section, key, "a number");
  }

  [[nodiscard]] std::int64_t get_int(std::string_view section, std::string_view key, std::optional<std::int64_t> fallback = {}) const {
    const auto* v = find(section, key);
    if (v == nullptr) {
      return require(fallback, section, key);
    }
    if (const auto* i = std::get_if<std::int64_t>(v)) {
      return *i;
    }
    throw type_error(section, key, "an integer");
  }

  [[nodiscard]] std::size_t get_count(std::string_view section, std::string_view key, std::optional<std::size_t> fallback = {}) const {
    if (find(section, key) == nullptr) {
      return require(fallback, section, key);
    }
    const auto i = get_int(section, key);
    if (i < 0) {
      throw ConfigError(qualified(section, key) + " must be non-negative");
    }
    return static_cast<std::size_t>(i);
  }

  [[nodiscard]] bool get_bool(std::string_view section, std::string_view key, std::optional<bool> fallback = {}) const {
    const auto* v = find(section, key);
    if (v == nullptr) {
      return require(fallback, section, key);
    }
    if (const auto* b = std::get_if<bool>(v)) {
      return *b;
    }
    throw type_error(section, key, "a boolean");
  }

  /// A flat numeric array; a scalar is accepted as a one-element array.
  [[nodiscard]] std::vector<double> get_array(std::string_view section, std::string_view key, std::optional<std::vector<double>> fallback = {}) const {
    const auto* v = find(section, key);
    if (v == nullptr) {
      return require(fallback, section, key);
    }
    if (const auto* a = std::get_if<std::vector<double>>(v)) {
      return *a;
    }
    if (std::holds_alternative<double>(*v) || std::holds_alternative<std::int64_t>(*v)) {
      return {get_double(section, key)};
    }
    throw type_error(section, key, "a numeric array");
  }

 private:
  [[nodiscard]] static std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') {
        quoted = !quoted;
      } else if (line[i] == '#' && !quoted) {
        return line.substr(0, i);
      }
    }
    return line;
  }

  [[nodiscard]] static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
      return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

  [[nodiscard]] static double parse_number(const std::string& token) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token.front() == '+') {
      ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
      throw ConfigError("invalid number '" + token + "'");
    }
    return value;
  }

  [[nodiscard]] static ConfigValue parse_value(const std::string& text) {
    if (text.empty()) {
      throw ConfigError("missing value");
    }
    if (text == "true" || text == "false") {
      return text == "true";
    }
    if (text.front() == '"') {
      if (text.size() < 2 || text.back() != '"') {
        throw ConfigError("unterminated string");
      }
      return text.substr(1, text.size() - 2);
    }
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw ConfigError("unterminated array");
      }
      std::vector<double> out;
      std::stringstream items{text.substr(1, text.size() - 2)};
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
          out.push_back(parse_number(item));
        }
      }
      return out;
    }
    const bool integral = text.find_first_of(".eEinfa") == std::string::npos;
    if (integral) {
      std::int64_t value = 0;
      const char* first = text.data() + (text.front() == '+' ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
      if (ec == std::errc{} && ptr == text.data() + text.size()) {
        return value;
      }
      throw ConfigError("invalid integer '" + text + "'");
    }
    return parse_number(text);
  }

  [[nodiscard]] const ConfigValue* find(std::string_view section, std::string_view key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) {
      return nullptr;
    }
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  [[nodiscard]] static std::string qualified(std::string_view section, std::string_view key) {
    return std::string{section} + "." + std::string{key};
  }

  template <typename T>
  [[nodiscard]] static T require(const std::optional<T>& fallback, std::string_view section, std::string_view key) {
    if (!fallback) {
      throw ConfigError("missing required key " + qualified(section, key));
    }
    return *fallback;
  }

  [[nodiscard]] static ConfigError type_error(std::string_view section, std::string_view key, const char* expected) {
    return ConfigError(qualified(section, key) + " must be " + expected);
  }

  std::map<std::string, Section, std::less<>> sections_;
};

/// Which benchmark density to build, plus its parameters.
struct TargetSpec {
  std::string name = "five_mode";
  std::int64_t dimension = 2;  ///< `gaussian` and `high_dim` only.
  std::uint64_t data_seed = 1;
  std::size_t data_size = 0;  ///< 0 picks the target's default.
  std::optional<double> noise;  ///< Observation noise; the logistic map's lambda.
  std::size_t basis_count = 5;
  std::string basis_kind = "gaussian";
  double prior_mean = 0.0;
  double prior_sd = 1.0;
  double log_shift = 0.0;  ///< Multiplies the density by `exp(log_shift)`.
  std::vector<double> reference_mean;  ///< Ground truth for targets without closed-form moments.
};

/// Upper-layer (MCMC) settings.
struct UpperSpec {
  std::string algorithm = "mh";  ///< mh | hmc | gibbs
  std::size_t chains = 1;
  std::size_t iterations = 1;

  double proposal_sd = 1.0;  ///< Random-walk standard deviation.

  double step_size = 0.1;
  std::int64_t leapfrog_steps = 1;
  double mass = 1.0;
  bool randomize = false;  ///< Per-chain `(L, step)` drawn from the ranges below.
  std::vector<double> leapfrog_range{1.0, 7.0};
  std::vector<double> step_range{0.01, 0.7};

  std::int64_t inner_steps = 2;
  std::vector<double> coordinate_sd{1.0};
  std::string scan = "ascending";

  std::string invariant = "full";  ///< full | partial | tempered
  std::size_t subset_size = 0;  ///< 0: disjoint partition into `chains` parts.
  std::string partition = "random";
  std::string prior_mode = "full";
  double beta = 1.0;

  std::string init = "box";  ///< box | prior | point
  std::vector<double> init_low;
  std::vector<double> init_high;
  std::vector<double> init_state;
};

/// Lower-layer (importance sampling) settings.
struct LowerSpec {
  std::size_t samples = 1;  ///< M.
  double proposal_sd = 1.0;  ///< sigma_p of the isotropic policy.
  std::string covariance = "isotropic";  ///< isotropic | chain
  std::string scheme = "complete";
  std::size_t clusters = 0;  ///< B, compressed scheme only.
  std::string summary = "mean";  ///< mean | random
  bool recycle = false;
};

/// Repetition, seeding and budget settings.
struct RunSpec {
  std::string method = "lais";  ///< lais | plain_mcmc | naive_mc
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> budget;  ///< E, in full plus partial posterior evaluations.
  std::size_t naive_samples = 10000;
  unsigned threads = 1;
};

struct ExperimentConfig {
  TargetSpec target;
  UpperSpec upper;
  LowerSpec lower;
  RunSpec run;

  /// Cross-field checks that need no target.
  void validate() const {
    const auto fail = [](const std::string& what) { throw ConfigError(what); };
    const auto one_of = [&](const std::string& value, std::initializer_list<const char*> allowed, const char* key) {
      for (const char* a : allowed) {
        if (value == a) {
          return;
        }
      }
      fail(std::string{key} + ": unknown value '" + value + "'");
    };
    one_of(upper.algorithm, {"mh", "hmc", "gibbs"}, "upper.algorithm");
    one_of(upper.invariant, {"full", "partial", "tempered"}, "upper.invariant");
    one_of(upper.partition, {"random", "contiguous"}, "upper.partition");
    one_of(upper.prior_mode, {"full", "split"}, "upper.prior_mode");
    one_of(upper.scan, {"ascending", "random"}, "upper.scan");
    one_of(upper.init, {"box", "prior", "point"}, "upper.init");
    one_of(lower.scheme, {"standard", "spatial", "temporal", "complete", "compressed"}, "lower.scheme");
    one_of(lower.covariance, {"isotropic", "chain"}, "lower.covariance");
    one_of(lower.summary, {"mean", "random"}, "lower.summary");
    one_of(run.method, {"lais", "plain_mcmc", "naive_mc"}, "run.method");
    if (upper.chains == 0 || upper.iterations == 0) {
      fail("upper.chains and upper.iterations must be positive");
    }
    if (!(upper.proposal_sd > 0.0) || !(lower.proposal_sd > 0.0)) {
      fail("proposal standard deviations must be positive");
    }
    if (upper.leapfrog_range.size() != 2 || upper.step_range.size() != 2 ||
        upper.leapfrog_range[0] < 1 || upper.leapfrog_range[1] < upper.leapfrog_range[0] ||
        !(upper.step_range[0] > 0.0) || upper.step_range[1] < upper.step_range[0]) {
      fail("upper.leapfrog_range and upper.step_range must be increasing pairs of positive values");
    }
    if (run.runs == 0) {
      fail("run.runs must be positive");
    }
    if (lower.samples == 0) {
      fail("lower.samples must be positive");
    }
    if (lower.recycle) {
      if (lower.samples > 1) {
        fail("lower.recycle = true forbids lower.samples > 1: a recycled set has one candidate per step");
      }
      if (upper.algorithm != "mh") {
        fail("lower.recycle needs random-walk chains (upper.algorithm = \"mh\")");
      }
      if (lower.scheme == "compressed") {
        fail("lower.recycle does not support the compressed scheme");
      }
    }
    if (lower.scheme == "compressed" && lower.clusters == 0) {
      fail("the compressed scheme needs lower.clusters >= 1");
    }
    if (lower.covariance == "chain" && upper.algorithm != "mh") {
      fail("lower.covariance = \"chain\" needs random-walk chains");
    }
    if (upper.invariant == "tempered" && !(upper.beta > 0.0)) {
      fail("upper.beta must be positive");
    }
    if (upper.init == "point" && upper.init_state.empty()) {
      fail("upper.init = \"point\" needs upper.init_state");
    }
    if (upper.init_low.size() != upper.init_high.size()) {
      fail("upper.init_low and upper.init_high must have the same length");
    }
  }

  [[nodiscard]] static ExperimentConfig from_table(const ConfigTable& t) {
    static const std::map<std::string, std::vector<std::string>, std::less<>> known{
        {"target", {"name", "dimension", "data_seed", "data_size", "noise", "basis_count", "basis_kind",
                    "prior_mean", "prior_sd", "log_shift", "reference_mean"}},
        {"upper", {"algorithm", "chains", "iterations", "proposal_sd", "step_size", "leapfrog_steps", "mass",
                   "randomize", "leapfrog_range", "step_range", "inner_steps", "coordinate_sd", "scan",
                   "invariant", "subset_size", "partition", "prior_mode", "beta", "init", "init_low",
                   "init_high", "init_state"}},
        {"lower", {"samples", "proposal_sd", "covariance", "scheme", "clusters", "summary", "recycle"}},
        {"run", {"method", "runs", "seed", "budget", "naive_samples", "threads"}},
    };
    for (const auto& [section, entries] : t.sections()) {
      const auto k = known.find(section);
      if (k == known.end()) {
        throw ConfigError("unknown section [" + section + "]");
      }
      for (const auto& [key, value] : entries) {
        if (std::find(k->second.begin(), k->second.end(), key) == k->second.end()) {
          throw ConfigError("unknown key " + section + "." + key);
        }
      }
    }

    ExperimentConfig c;
    auto& tg = c.target;
    tg.name = t.get_string("target", "name");
    tg.dimension = t.get_int("target", "dimension", tg.dimension);
    tg.data_seed = static_cast<std::uint64_t>(t.get_int("target", "data_seed", 1));
    tg.data_size = t.get_count("target", "data_size", 0);
    if (t.has("target", "noise")) {
      tg.noise = t.get_double("target", "noise");
    }
    tg.basis_count = t.get_count("target", "basis_count", tg.basis_count);
    tg.basis_kind = t.get_string("target", "basis_kind", tg.basis_kind);
    tg.prior_mean = t.get_double("target", "prior_mean", tg.prior_mean);
    tg.prior_sd = t.get_double("target", "prior_sd", tg.prior_sd);
    tg.log_shift = t.get_double("target", "log_shift", tg.log_shift);
    tg.reference_mean = t.get_array("target", "reference_mean", std::vector<double>{});

    auto& up = c.upper;
    up.algorithm = t.get_string("upper", "algorithm", up.algorithm);
    up.chains = t.get_count("upper", "chains");
    up.iterations = t.get_count("upper", "iterations");
    up.proposal_sd = t.get_double("upper", "proposal_sd", up.proposal_sd);
    up.step_size = t.get_double("upper", "step_size", up.step_size);
    up.leapfrog_steps = t.get_int("upper", "leapfrog_steps", up.leapfrog_steps);
    up.mass = t.get_double("upper", "mass", up.mass);
    up.randomize = t.get_bool("upper", "randomize", up.randomize);
    up.leapfrog_range = t.get_array("upper", "leapfrog_range", up.leapfrog_range);
    up.step_range = t.get_array("upper", "step_range", up.step_range);
    up.inner_steps = t.get_int("upper", "inner_steps", up.inner_steps);
    up.coordinate_sd = t.get_array("upper", "coordinate_sd", up.coordinate_sd);
    up.scan = t.get_string("upper", "scan", up.scan);
    up.invariant = t.get_string("upper", "invariant", up.invariant);
    up.subset_size = t.get_count("upper", "subset_size", up.subset_size);
    up.partition = t.get_string("upper", "partition", up.partition);
    up.prior_mode = t.get_string("upper", "prior_mode", up.prior_mode);
    up.beta = t.get_double("upper", "beta", up.beta);
    up.init = t.get_string("upper", "init", up.init);
    up.init_low = t.get_array("upper", "init_low", std::vector<double>{});
    up.init_high = t.get_array("upper", "init_high", std::vector<double>{});
    up.init_state = t.get_array("upper", "init_state", std::vector<double>{});

    auto& lo = c.lower;
    lo.samples = t.get_count("lower", "samples", lo.samples);
    lo.proposal_sd = t.get_double("lower", "proposal_sd", up.proposal_sd);
    lo.covariance = t.get_string("lower", "covariance", lo.covariance);
    lo.scheme = t.get_string("lower", "scheme", lo.scheme);
    lo.clusters = t.get_count("lower", "clusters", lo.clusters);
    lo.summary = t.get_string("lower", "summary", lo.summary);
    lo.recycle = t.get_bool("lower", "recycle", lo.recycle);

    auto& rn = c.run;
    rn.method = t.get_string("run", "method", rn.method);
    rn.runs = t.get_count("run", "runs", rn.runs);
    rn.seed = static_cast<std::uint64_t>(t.get_int("run", "seed", 0));
    if (t.has("run", "budget")) {
      rn.budget = t.get_count("run", "budget");
    }
    rn.naive_samples = t.get_count("run", "naive_samples", rn.naive_samples);
    rn.threads = static_cast<unsigned>(std::max<std::size_t>(1, t.get_count("run", "threads", 1)));

    c.validate();
    return c;
  }

  [[nodiscard]] static ExperimentConfig load(const std::string& path) { return from_table(ConfigTable::load(path)); }
  [[nodiscard]] static ExperimentConfig parse(std::string_view text) { return from_table(ConfigTable::parse(text)); }
};

}  // namespace lais

#endif
