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

#ifndef LAIS_HARNESS_IO_HPP
#define LAIS_HARNESS_IO_HPP

#include <lais/compression.hpp>
#include <lais/harness/experiment.hpp>
#include <lais/lower_layer.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

/**
 * \file
 * Result serialization.
 *
 * CSV has one row per run with the columns
 * `run,scheme,N,T,M,B,log_Z_hat,I_hat_1..I_hat_s,ess,full_evals,partial_evals,proposal_evals,wall_upper_ms,wall_lower_ms`;
 * the evidence and ESS cells are empty for MCMC baselines. JSON holds the same runs plus
 * the full ledgers and the summary, and validates against
 * `schemas/estimator_output.schema.json`. Doubles are written with 17 significant digits,
 * so parsing the output reproduces every value exactly.
 */

namespace lais {

using Json = nlohmann::json;

[[nodiscard]] inline Json vector_to_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

[[nodiscard]] inline Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

[[nodiscard]] inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(vector_to_json(m.row(i).transpose()));
  }
  return rows;
}

[[nodiscard]] inline Matrix matrix_from_json(const Json& j) {
  if (j.empty()) {
    return {};
  }
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.row(i) = vector_from_json(j.at(static_cast<std::size_t>(i))).transpose();
  }
  return m;
}

[[nodiscard]] inline Json ledger_to_json(const EvalLedger& l) {
  Json partial = Json::object();
  for (const auto& [index, n] : l.partial_posterior_evals) {
    partial[std::to_string(index)] = n;
  }
  return {
      {"full_posterior", l.full_posterior_evals},
      {"partial_posterior", partial},
      {"gradient", l.gradient_evals},
      {"proposal", l.proposal_evals},
      {"init", l.init_evals},
      {"lower_draws", l.lower_draws},
  };
}

[[nodiscard]] inline EvalLedger ledger_from_json(const Json& j) {
  EvalLedger l;
  l.full_posterior_evals = j.at("full_posterior").get<std::uint64_t>();
  for (const auto& [key, value] : j.at("partial_posterior").items()) {
    l.partial_posterior_evals[std::stoull(key)] = value.get<std::uint64_t>();
  }
  l.gradient_evals = j.at("gradient").get<std::uint64_t>();
  l.proposal_evals = j.at("proposal").get<std::uint64_t>();
  l.init_evals = j.at("init").get<std::uint64_t>();
  l.lower_draws = j.at("lower_draws").get<std::uint64_t>();
  return l;
}

/// `{log_Z_hat, Z_hat, I_hat, ess, count, scheme, evals}`; the evidence and ESS are omitted when absent.
[[nodiscard]] inline Json estimator_to_json(const EstimatorOutput& e, bool has_evidence = true) {
  Json j{
      {"I_hat", vector_to_json(e.I_hat)},
      {"count", e.count},
      {"zero_weights", e.zero_weights},
      {"scheme", e.scheme},
      {"degenerate", e.degenerate},
      {"evals", ledger_to_json(e.evals)},
  };
  if (has_evidence) {
    j["log_Z_hat"] = e.log_Z_hat;
    j["Z_hat"] = e.Z_hat;
    j["ess"] = e.ess;
  }
  return j;
}

[[nodiscard]] inline EstimatorOutput estimator_from_json(const Json& j) {
  EstimatorOutput e;
  e.I_hat = vector_from_json(j.at("I_hat"));
  e.count = j.at("count").get<std::size_t>();
  e.zero_weights = j.value("zero_weights", std::size_t{0});
  e.scheme = j.at("scheme").get<std::string>();
  e.degenerate = j.value("degenerate", false);
  e.evals = ledger_from_json(j.at("evals"));
  if (j.contains("log_Z_hat")) {
    e.log_Z_hat = j.at("log_Z_hat").get<double>();
    e.Z_hat = j.at("Z_hat").get<double>();
    e.ess = j.at("ess").get<double>();
  } else {
    e.log_Z_hat = e.Z_hat = e.ess = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

[[nodiscard]] inline Json run_to_json(const RunRecord& r) {
  Json j{
      {"run", r.run},
      {"seed", r.seed},
      {"method", r.method},
      {"scheme", r.scheme},
      {"N", r.N},
      {"T", r.T},
      {"M", r.M},
      {"B", r.B},
      {"estimator", estimator_to_json(r.estimate, r.has_evidence)},
      {"ledger", ledger_to_json(r.ledger)},
      {"wall_ms",
       {{"upper", r.wall.upper_ms},
        {"compression", r.wall.compression_ms},
        {"sampling", r.wall.sampling_ms},
        {"weighting", r.wall.weighting_ms}}},
  };
  if (r.moments) {
    j["moments"] = {{"mean", vector_to_json(r.moments->mean)}, {"covariance", matrix_to_json(r.moments->covariance)}};
  }
  return j;
}

[[nodiscard]] inline RunRecord run_from_json(const Json& j) {
  RunRecord r;
  r.run = j.at("run").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.method = j.at("method").get<std::string>();
  r.scheme = j.at("scheme").get<std::string>();
  r.N = j.at("N").get<std::size_t>();
  r.T = j.at("T").get<std::size_t>();
  r.M = j.at("M").get<std::size_t>();
  r.B = j.at("B").get<std::size_t>();
  r.estimate = estimator_from_json(j.at("estimator"));
  r.has_evidence = j.at("estimator").contains("log_Z_hat");
  r.ledger = ledger_from_json(j.at("ledger"));
  const auto& w = j.at("wall_ms");
  r.wall = {w.at("upper").get<double>(), w.at("compression").get<double>(), w.at("sampling").get<double>(),
            w.at("weighting").get<double>()};
  if (j.contains("moments")) {
    r.moments = MomentEstimate{vector_from_json(j.at("moments").at("mean")), matrix_from_json(j.at("moments").at("covariance"))};
  }
  return r;
}

[[nodiscard]] inline Json summary_to_json(const RunSummary& s) {
  Json j{{"runs", s.runs}, {"totals", ledger_to_json(s.totals)}};
  const auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    }
  };
  put("mse_I", s.mse_I);
  put("mse_Z", s.mse_Z);
  put("mse_moments", s.mse_moments);
  put("mean_Z", s.mean_Z);
  put("var_Z", s.var_Z);
  put("mean_log_Z", s.mean_log_Z);
  j["wall_ms"] = {{"upper", s.wall.upper_ms},
                  {"compression", s.wall.compression_ms},
                  {"sampling", s.wall.sampling_ms},
                  {"weighting", s.wall.weighting_ms}};
  return j;
}

[[nodiscard]] inline Json result_to_json(const RunResult& result) {
  Json runs = Json::array();
  for (const auto& r : result.runs) {
    runs.push_back(run_to_json(r));
  }
  return {
      {"method", result.config.run.method},
      {"target", result.config.target.name},
      {"dimension", result.dimension},
      {"master_seed", result.config.run.seed},
      {"runs", runs},
      {"summary", summary_to_json(result.summary)},
  };
}

/// Parses the runs of a JSON result document.
[[nodiscard]] inline std::vector<RunRecord> runs_from_json(const Json& j) {
  std::vector<RunRecord> out;
  for (const auto& r : j.at("runs")) {
    out.push_back(run_from_json(r));
  }
  return out;
}

[[nodiscard]] inline Json mixture_to_json(const CompressedMixture& mix) {
  return {
      {"B", mix.components()},
      {"points", matrix_to_json(mix.points().transpose())},
      {"weights", vector_to_json(mix.weights())},
      {"sigma", matrix_to_json(mix.sigma())},
  };
}

[[nodiscard]] inline CompressedMixture mixture_from_json(const Json& j) {
  const Matrix points = matrix_from_json(j.at("points")).transpose();
  if (points.cols() != j.at("B").get<Eigen::Index>()) {
    throw ArgumentError("mixture_from_json: B does not match the number of points");
  }
  return CompressedMixture{points, vector_from_json(j.at("weights")), matrix_from_json(j.at("sigma"))};
}

namespace detail {

inline void put_double(std::ostream& out, double v) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
}

}  // namespace detail

/// CSV header for `dimension`-valued estimates.
[[nodiscard]] inline std::string csv_header(Eigen::Index dimension) {
  std::string h = "run,scheme,N,T,M,B,log_Z_hat";
  for (Eigen::Index i = 1; i <= dimension; ++i) {
    h += ",I_hat_" + std::to_string(i);
  }
  return h + ",ess,full_evals,partial_evals,proposal_evals,wall_upper_ms,wall_lower_ms";
}

inline void write_results_csv(const RunResult& result, std::ostream& out) {
  out << csv_header(result.dimension) << '\n';
  for (const auto& r : result.runs) {
    out << r.run << ',' << r.scheme << ',' << r.N << ',' << r.T << ',' << r.M << ',' << r.B << ',';
    if (r.has_evidence) {
      detail::put_double(out, r.estimate.log_Z_hat);
    }
    for (Eigen::Index i = 0; i < r.estimate.I_hat.size(); ++i) {
      out << ',';
      detail::put_double(out, r.estimate.I_hat[i]);
    }
    out << ',';
    if (r.has_evidence) {
      detail::put_double(out, r.estimate.ess);
    }
    out << ',' << r.ledger.full_posterior_evals << ',' << r.ledger.partial_total() << ',' << r.ledger.proposal_evals
        << ',';
    detail::put_double(out, r.wall.upper_ms);
    out << ',';
    detail::put_double(out, r.wall.lower_ms());
    out << '\n';
  }
}

/// One parsed CSV row; `log_Z_hat` and `ess` are NaN when the cell is empty.
struct CsvRow {
  std::size_t run = 0;
  std::string scheme;
  std::size_t N = 0;
  std::size_t T = 0;
  std::size_t M = 0;
  std::size_t B = 0;
  double log_Z_hat = 0.0;
  Vector I_hat;
  double ess = 0.0;
  std::uint64_t full_evals = 0;
  std::uint64_t partial_evals = 0;
  std::uint64_t proposal_evals = 0;
  double wall_upper_ms = 0.0;
  double wall_lower_ms = 0.0;
};

[[nodiscard]] inline std::vector<CsvRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("run,scheme,N,T,M,B,log_Z_hat", 0) != 0) {
    throw ArgumentError("read_results_csv: missing or unexpected header");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss{line};
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      header.push_back(cell);
    }
  }
  const std::size_t dim = header.size() - 13;
  const auto number = [](const std::string& cell) {
    return cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell);
  };
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss{line};
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (line.back() == ',') {
      cells.emplace_back();
    }
    if (cells.size() != header.size()) {
      throw ArgumentError("read_results_csv: row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(header.size()));
    }
    CsvRow r;
    r.run = std::stoull(cells[0]);
    r.scheme = cells[1];
    r.N = std::stoull(cells[2]);
    r.T = std::stoull(cells[3]);
    r.M = std::stoull(cells[4]);
    r.B = std::stoull(cells[5]);
    r.log_Z_hat = number(cells[6]);
    r.I_hat.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      r.I_hat[static_cast<Eigen::Index>(i)] = number(cells[7 + i]);
    }
    std::size_t k = 7 + dim;
    r.ess = number(cells[k++]);
    r.full_evals = std::stoull(cells[k++]);
    r.partial_evals = std::stoull(cells[k++]);
    r.proposal_evals = std::stoull(cells[k++]);
    r.wall_upper_ms = number(cells[k++]);
    r.wall_lower_ms = number(cells[k++]);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// `n,t,m,x_1..x_D,log_weight`, one row per sample.
inline void write_weighted_samples_csv(const WeightedSampleSet& set, std::ostream& out) {
  out << "n,t,m";
  for (Eigen::Index i = 1; i <= set.points.rows(); ++i) {
    out << ",x_" << i;
  }
  out << ",log_weight\n";
  for (std::size_t s = 0; s < set.size(); ++s) {
    const auto& o = set.origins[s];
    out << o.n << ',' << o.t << ',' << o.m;
    const auto col = static_cast<Eigen::Index>(s);
    for (Eigen::Index i = 0; i < set.points.rows(); ++i) {
      out << ',';
      detail::put_double(out, set.points(i, col));
    }
    out << ',';
    detail::put_double(out, set.log_weights[col]);
    out << '\n';
  }
}

/// Writes `result` to `path` as CSV or JSON.
inline void emit(const RunResult& result, const std::string& format, const std::string& path) {
  if (format != "csv" && format != "json") {
    throw ArgumentError("emit: format must be csv or json, got '" + format + "'");
  }
  std::ofstream out{path};
  if (!out) {
    throw Error("emit: cannot open '" + path + "' for writing");
  }
  if (format == "csv") {
    write_results_csv(result, out);
  } else {
    out << result_to_json(result).dump(2) << '\n';
  }
  out.flush();
  if (!out) {
    throw Error("emit: write to '" + path + "' failed");
  }
}

}  // namespace lais

#endif
