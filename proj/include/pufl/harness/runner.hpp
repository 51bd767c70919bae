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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pufl/attack.hpp"
#include "pufl/harness/config.hpp"
#include "pufl/harness/csv.hpp"

namespace pufl {

// Per-round, per-client history row (one extra row per round for the global
// model, client = -1).
struct HistoryRecord {
  std::string scenario;
  int seed = 0;
  double eps1 = 0.0;
  int round = 0;
  int client = -1;
  std::optional<double> update_norm;
  double clean_loss = 0.0;
};

struct FrontierRow {
  double eps1 = 0.0;
  double mean_eps_p = 0.0;   // round-1 attack leakage, seed mean
  double mean_eps_u = 0.0;   // final-round utility loss, seed mean
  double mean_delta = 0.0;   // round-1 distortion extent, seed mean
  double mean_bound = 0.0;   // round-1 leakage bound, seed mean
  double eps1_thm_threshold = 0.0;  // distortion radius that would cap leakage
                                    // at the measured mean
};

struct ScenarioRunResult {
  std::vector<MetricsRecord> rows;
  std::vector<HistoryRecord> history;
  std::vector<FrontierRow> frontier;  // one row per distinct eps1 executed
  EmpiricalConstants constants;
  int clamp_events = 0;          // leakage values that left [0,1] before clamping
  int gate_satisfied_runs = 0;   // rows whose distortion clears the gate
  int bound_violations = 0;      // gate rows with eps_p > bound + 0.05
};

// Full pipeline for every (seed, eps1) pair: generate data, train under the
// distortion plan, attack every round's exposed update of the target client,
// measure leakage / utility loss / distortion extent, fit the envelope
// constants on the family of traces, then stamp bounds onto every row.
ScenarioRunResult run_scenario(const ScenarioConfig& config,
                               const std::vector<double>& eps1_grid, int jobs);

// `run` entry point: single grid point taken from the configured plan.
ScenarioRunResult run_scenario(const ScenarioConfig& config, int jobs);

// `sweep` entry point over an explicit grid (>= 1 point, duplicates rejected).
ScenarioRunResult sweep_frontier(const ScenarioConfig& config,
                                 const std::vector<double>& eps1_grid, int jobs);

struct BayesCheckRow {
  int unit = 0;
  int client = -1;  // -1 for unit-level checks
  std::optional<double> alpha;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = false;
  std::optional<double> aux;      // check-specific extra value
  std::optional<bool> aux_flag;   // check-specific extra verdict
};

struct BayesSuiteResult {
  std::vector<BayesCheckRow> rows;
  int violations = 0;          // failures among the gated checks
  int checks = 0;              // gated checks executed
  int premise_units = 0;       // premise-satisfying units for the utility bound
};

// Exact verification batch over a seeded corpus of finite worlds: the two
// bound lemmas per client, both trade-off theorems per unit, and the utility
// lower bound on a premise-satisfying corpus of the same size.
BayesSuiteResult verify_bayes_suite(const ScenarioConfig& config, int jobs);

std::string history_to_csv(std::vector<HistoryRecord> rows);
std::string frontier_to_csv(const std::vector<FrontierRow>& rows);
std::string bayes_to_csv(std::vector<BayesCheckRow> rows);

}  // namespace pufl
