// Copyright 2026 The pufl Authors
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

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "pufl/harness/config.hpp"
#include "pufl/harness/csv.hpp"
#include "pufl/harness/runner.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitBoundViolation = 3;

using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int jobs = 1;
};

pufl::ScenarioConfig load(const CommonOptions& opt) {
  pufl::ScenarioConfig cfg = pufl::load_config(opt.config_path);
  if (opt.seed) cfg.master_seed = *opt.seed;
  if (opt.out_dir) cfg.output_dir = *opt.out_dir;
  return cfg;
}

std::filesystem::path ensure_out_dir(const pufl::ScenarioConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json constants_json(const pufl::EmpiricalConstants& c) {
  return {{"c2", c.c2}, {"c_b", c.c_b}, {"c_a", c.c_a}, {"p", c.p},
          {"r_squared", c.r_squared}};
}

void write_run_outputs(const pufl::ScenarioConfig& cfg, const pufl::ScenarioRunResult& res,
                       const std::string& command) {
  const std::filesystem::path dir = ensure_out_dir(cfg);
  pufl::write_text_file((dir / "metrics.csv").string(), pufl::metrics_to_csv(res.rows));
  pufl::write_text_file((dir / "history.csv").string(), pufl::history_to_csv(res.history));
  pufl::write_text_file((dir / "frontier.csv").string(), pufl::frontier_to_csv(res.frontier));

  json summary = {
      {"command", command},
      {"scenario", cfg.id},
      {"master_seed", cfg.master_seed},
      {"seeds", cfg.seeds},
      {"rows", res.rows.size()},
      {"constants", constants_json(res.constants)},
      {"clamp_events", res.clamp_events},
      {"gate_satisfied_runs", res.gate_satisfied_runs},
      {"bound_violations", res.bound_violations},
  };
  json frontier = json::array();
  for (const pufl::FrontierRow& row : res.frontier) {
    frontier.push_back({{"eps1", row.eps1},
                        {"mean_eps_p", row.mean_eps_p},
                        {"mean_eps_u", row.mean_eps_u},
                        {"mean_delta", row.mean_delta},
                        {"mean_bound", row.mean_bound},
                        {"eps1_threshold", row.eps1_thm_threshold}});
  }
  summary["frontier"] = frontier;
  pufl::write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pufl: federated privacy-utility laboratory"};
  app.require_subcommand(1);

  CommonOptions opt;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", opt.config_path, "scenario config file")->required();
    cmd->add_option("--seed", opt.seed, "override master seed");
    cmd->add_option("--out", opt.out_dir, "override output directory");
    cmd->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 256));
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run the configured scenario");
  add_common(run_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep the eps1 grid");
  add_common(sweep_cmd);
  std::string eps1_list;
  sweep_cmd->add_option("--eps1", eps1_list, "comma-separated eps1 grid (default from config)");

  CLI::App* verify_cmd = app.add_subcommand("verify-bayes", "run the finite-world verification batch");
  add_common(verify_cmd);

  CLI::App* fit_cmd = app.add_subcommand("fit-constants", "fit envelope constants on the scenario family");
  add_common(fit_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const pufl::ScenarioConfig cfg = load(opt);
      const pufl::ScenarioRunResult res = pufl::run_scenario(cfg, opt.jobs);
      write_run_outputs(cfg, res, "run");
      std::cout << "run: " << res.rows.size() << " rows, constants c2="
                << pufl::format_double(res.constants.c2)
                << " c_b=" << pufl::format_double(res.constants.c_b)
                << " p=" << pufl::format_double(res.constants.p) << "\n";
      return kExitSuccess;
    }
    if (sweep_cmd->parsed()) {
      pufl::ScenarioConfig cfg = load(opt);
      std::vector<double> grid = cfg.eps1_grid;
      if (!eps1_list.empty()) {
        grid.clear();
        std::stringstream ss(eps1_list);
        std::string item;
        while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
      }
      const pufl::ScenarioRunResult res = pufl::sweep_frontier(cfg, grid, opt.jobs);
      write_run_outputs(cfg, res, "sweep");
      for (const pufl::FrontierRow& row : res.frontier) {
        std::cout << "eps1=" << pufl::format_double(row.eps1)
                  << " eps_p=" << pufl::format_double(row.mean_eps_p)
                  << " eps_u=" << pufl::format_double(row.mean_eps_u)
                  << " delta=" << pufl::format_double(row.mean_delta) << "\n";
      }
      return kExitSuccess;
    }
    if (verify_cmd->parsed()) {
      const pufl::ScenarioConfig cfg = load(opt);
      const pufl::BayesSuiteResult res = pufl::verify_bayes_suite(cfg, opt.jobs);
      const std::filesystem::path dir = ensure_out_dir(cfg);
      pufl::write_text_file((dir / "bayes_report.csv").string(), pufl::bayes_to_csv(res.rows));
      json summary = {
          {"command", "verify-bayes"},
          {"scenario", cfg.id},
          {"master_seed", cfg.master_seed},
          {"corpus", cfg.bayes.corpus},
          {"checks", res.checks},
          {"violations", res.violations},
          {"premise_units", res.premise_units},
      };
      pufl::write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
      std::cout << "verify-bayes: " << res.checks << " checks, " << res.violations
                << " violations\n";
      return res.violations == 0 ? kExitSuccess : kExitBoundViolation;
    }
    if (fit_cmd->parsed()) {
      const pufl::ScenarioConfig cfg = load(opt);
      const pufl::ScenarioRunResult res = pufl::run_scenario(cfg, opt.jobs);
      const std::filesystem::path dir = ensure_out_dir(cfg);
      json summary = {
          {"command", "fit-constants"},
          {"scenario", cfg.id},
          {"master_seed", cfg.master_seed},
          {"constants", constants_json(res.constants)},
      };
      pufl::write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
      std::cout << "fit-constants: c2=" << pufl::format_double(res.constants.c2)
                << " c_b=" << pufl::format_double(res.constants.c_b)
                << " c_a=" << pufl::format_double(res.constants.c_a)
                << " p=" << pufl::format_double(res.constants.p)
                << " r2=" << pufl::format_double(res.constants.r_squared) << "\n";
      return kExitSuccess;
    }
  } catch (const pufl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitSuccess;
}
