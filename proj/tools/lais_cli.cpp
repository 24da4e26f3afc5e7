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

// lais: run LAIS experiments from a config file.
//
//   lais run <config> [--out DIR] [--format csv|json] [--seed U64] [--runs N] [--threads K]
//   lais verify-budget <config>
//   lais list-targets
//
// Exit codes: 0 success, 1 other failure, 2 config error, 3 budget mismatch,
// 4 degenerate weights.

#include <lais/lais.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitDegenerate = 4;

void print_summary(const lais::RunResult& result, std::ostream& out) {
  const auto& s = result.summary;
  out << "method=" << result.config.run.method << " target=" << result.config.target.name << " runs=" << s.runs
      << '\n';
  const auto line = [&](const char* name, const std::optional<double>& v) {
    if (v) {
      out << "  " << name << " = " << *v << '\n';
    }
  };
  line("mean Z_hat", s.mean_Z);
  line("var Z_hat", s.var_Z);
  line("mean log Z_hat", s.mean_log_Z);
  line("MSE(I_hat)", s.mse_I);
  line("MSE(Z_hat)", s.mse_Z);
  line("MSE(moments)", s.mse_moments);
  out << "  evaluations: full=" << s.totals.full_posterior_evals << " partial=" << s.totals.partial_total()
      << " proposal=" << s.totals.proposal_evals << " gradient=" << s.totals.gradient_evals << '\n';
  out << "  wall ms: upper=" << s.wall.upper_ms << " lower=" << s.wall.lower_ms() << '\n';
}

int run_command(const std::string& path, const std::string& out_dir, const std::string& format,
                std::optional<std::uint64_t> seed, std::optional<std::size_t> runs, std::optional<unsigned> threads) {
  auto config = lais::ExperimentConfig::load(path);
  if (seed) {
    config.run.seed = *seed;
  }
  if (runs) {
    config.run.runs = *runs;
  }
  if (threads) {
    config.run.threads = std::max(1U, *threads);
  }
  const auto result = lais::run_experiment(config);
  if (out_dir.empty()) {
    if (format == "csv") {
      lais::write_results_csv(result, std::cout);
    } else {
      std::cout << lais::result_to_json(result).dump(2) << '\n';
    }
    print_summary(result, std::cerr);
    return 0;
  }
  std::filesystem::create_directories(out_dir);
  const auto file = (std::filesystem::path{out_dir} / ("results." + format)).string();
  lais::emit(result, format, file);
  print_summary(result, std::cout);
  std::cout << "wrote " << file << '\n';
  return 0;
}

int verify_budget_command(const std::string& path) {
  auto config = lais::ExperimentConfig::load(path);
  const auto target = lais::make_target(config.target);
  const auto expected = lais::expected_cost(config, target);
  if (!expected) {
    std::cout << "expected cost depends on the run (HMC with finite-difference gradients)\n";
    return kExitBudget;
  }
  const auto budget = config.run.budget;
  config.run.runs = 1;
  config.run.budget.reset();
  const auto result = lais::run_experiment(config);
  const auto& observed = result.runs.front().ledger;

  bool ok = true;
  const auto row = [&](const char* name, std::uint64_t want, std::uint64_t got) {
    const bool match = want == got;
    ok = ok && match;
    std::cout << "  " << name << ": expected " << want << ", observed " << got << (match ? "" : "  MISMATCH") << '\n';
  };
  std::cout << "budget check for " << path << " (one run)\n";
  row("full posterior evals", expected->full, observed.full_posterior_evals);
  row("partial posterior evals", expected->partial, observed.partial_total());
  row("proposal evals", expected->proposal, observed.proposal_evals);
  row("lower-layer draws", expected->lower_draws, observed.lower_draws);
  if (budget) {
    row("configured budget E", *budget, observed.posterior_total());
  }
  std::cout << (ok ? "OK" : "MISMATCH") << '\n';
  return ok ? 0 : kExitBudget;
}

int list_targets_command() {
  for (const auto& t : lais::target_catalog()) {
    std::cout << t.name << "\t" << t.description << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered adaptive importance sampling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<unsigned> threads;

  auto* run = app.add_subcommand("run", "Run an experiment and emit per-run results");
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_dir, "Output directory (default: write to stdout)");
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--seed", seed, "Master seed (overrides run.seed)");
  run->add_option("--runs", runs, "Number of repetitions (overrides run.runs)")->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads (overrides run.threads)")->check(CLI::PositiveNumber);

  std::string verify_path;
  auto* verify = app.add_subcommand("verify-budget", "Compare one run's ledger with the analytic cost table");
  verify->add_option("config", verify_path, "Experiment config file")->required();

  auto* list = app.add_subcommand("list-targets", "List the built-in targets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) {
      return run_command(config_path, out_dir, format, seed, runs, threads);
    }
    if (verify->parsed()) {
      return verify_budget_command(verify_path);
    }
    if (list->parsed()) {
      return list_targets_command();
    }
  } catch (const lais::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lais::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const lais::DegenerateWeightsError& e) {
    std::cerr << "degenerate weights: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
