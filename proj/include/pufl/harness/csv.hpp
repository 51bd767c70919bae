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

namespace pufl {

// One output row per (seed, eps1, round). Optional fields print as empty
// cells (explicit nulls); everything else is formatted with 9 significant
// digits so equal runs produce byte-identical files.
struct MetricsRecord {
  std::string scenario;
  int seed = 0;
  double eps1 = 0.0;
  int round = 0;
  std::optional<double> eps_p;
  std::optional<double> eps_u;
  std::optional<double> delta_extent;
  std::optional<double> leak_bound;
  std::optional<bool> gate;
  std::optional<double> c2;
  std::optional<double> cb;
  std::optional<double> p_exp;
};

std::string format_double(double v);

// Schema comment line, header and rows. Rows are sorted by
// (scenario, seed, eps1, round) before writing so parallel execution cannot
// change the bytes.
std::string metrics_to_csv(std::vector<MetricsRecord> rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace pufl
