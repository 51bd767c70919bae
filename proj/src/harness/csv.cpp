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

#include "pufl/harness/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace pufl {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {
std::string cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}
}  // namespace

std::string metrics_to_csv(std::vector<MetricsRecord> rows) {
  std::sort(rows.begin(), rows.end(), [](const MetricsRecord& a, const MetricsRecord& b) {
    return std::tie(a.scenario, a.seed, a.eps1, a.round) <
           std::tie(b.scenario, b.seed, b.eps1, b.round);
  });
  std::ostringstream out;
  out << "# pufl-metrics-v1\n";
  out << "scenario,seed,eps1,round,eps_p,eps_u,delta_extent,leak_bound,gate,c2,cb,p_exp\n";
  for (const MetricsRecord& r : rows) {
    out << r.scenario << ',' << r.seed << ',' << format_double(r.eps1) << ',' << r.round
        << ',' << cell(r.eps_p) << ',' << cell(r.eps_u) << ',' << cell(r.delta_extent)
        << ',' << cell(r.leak_bound) << ',' << (r.gate ? (*r.gate ? "1" : "0") : "")
        << ',' << cell(r.c2) << ',' << cell(r.cb) << ',' << cell(r.p_exp) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace pufl
