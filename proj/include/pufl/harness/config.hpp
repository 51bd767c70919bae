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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pufl/distort.hpp"
#include "pufl/federation.hpp"

namespace pufl {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct AttackSpec {
  int iters = 500;
  double lr = 0.12;
  int target_client = 0;
};

struct BayesSpec {
  int corpus = 500;
  std::vector<double> alphas = {0.1, 0.25, 0.5, 0.75, 0.9};
  int clients = 2;
  int max_data_atoms = 4;
  int max_param_atoms = 5;
};

// Declarative experiment description. Every run is fully determined by
// (config, master_seed).
struct ScenarioConfig {
  std::string id = "scenario";
  int seeds = 10;
  std::uint64_t master_seed = 1;

  ModelKind model_kind = ModelKind::kLinear;
  int hidden_width = 4;

  DataSpec data;
  int rounds = 1;
  TrainConfig train;

  DistortionPlan plan;
  AttackSpec attack;
  std::vector<double> eps1_grid = {0.0, 0.5, 1.0, 2.0};
  BayesSpec bayes;

  std::string output_dir = "out";

  void validate() const;
};

// Parses and validates the INI-style scenario file (sections, key = value,
// lists as comma-separated values; '#' comments). Unknown sections or keys
// are rejected by name; parse errors carry the line number.
ScenarioConfig load_config(const std::string& path);

ScenarioConfig parse_config_text(const std::string& text);

}  // namespace pufl
