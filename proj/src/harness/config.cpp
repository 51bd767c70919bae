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

#include "pufl/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pufl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct ParsedFile {
  // section -> key -> entry
  std::map<std::string, std::map<std::string, Entry>> sections;
};

ParsedFile parse_ini(const std::string& text) {
  ParsedFile out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      }
      out.sections[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    auto [it, inserted] = out.sections[section].emplace(key, Entry{value, line_no, false});
    if (!inserted) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "' in section [" + section + "]");
    }
  }
  return out;
}

class Reader {
 public:
  explicit Reader(ParsedFile file) : file_(std::move(file)) {}

  bool has(const std::string& section, const std::string& key) {
    auto s = file_.sections.find(section);
    if (s == file_.sections.end()) return false;
    return s->second.count(key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    Entry* e = find(section, key);
    return e != nullptr ? e->value : fallback;
  }

  double get_number(const std::string& section, const std::string& key, double fallback) {
    Entry* e = find(section, key);
    if (e == nullptr) return fallback;
    return parse_number(*e, section, key);
  }

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) {
    Entry* e = find(section, key);
    if (e == nullptr) return fallback;
    const double v = parse_number(*e, section, key);
    const auto r = static_cast<std::int64_t>(v);
    if (static_cast<double>(r) != v) {
      throw ConfigError("line " + std::to_string(e->line) + ": '" + section + "." + key +
                        "' must be an integer");
    }
    return r;
  }

  std::vector<double> get_list(const std::string& section, const std::string& key,
                               std::vector<double> fallback) {
    Entry* e = find(section, key);
    if (e == nullptr) return fallback;
    std::vector<double> values;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) {
        throw ConfigError("line " + std::to_string(e->line) + ": empty element in list '" +
                          section + "." + key + "'");
      }
      Entry fake{item, e->line, true};
      values.push_back(parse_number(fake, section, key));
    }
    if (values.empty()) {
      throw ConfigError("line " + std::to_string(e->line) + ": empty list '" + section + "." +
                        key + "'");
    }
    return values;
  }

  // Every parsed entry must have been consumed by a known key lookup.
  void reject_unknown(const std::set<std::string>& known_sections) {
    for (const auto& [section, entries] : file_.sections) {
      if (known_sections.count(section) == 0) {
        throw ConfigError("unknown section [" + section + "]");
      }
      for (const auto& [key, entry] : entries) {
        if (!entry.used) {
          throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key +
                            "' in section [" + section + "]");
        }
      }
    }
  }

 private:
  Entry* find(const std::string& section, const std::string& key) {
    auto s = file_.sections.find(section);
    if (s == file_.sections.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second;
  }

  double parse_number(const Entry& e, const std::string& section, const std::string& key) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("line " + std::to_string(e.line) + ": '" + section + "." + key +
                        "' is not a number: " + e.value);
    }
  }

  ParsedFile file_;
};

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "linear") return ModelKind::kLinear;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "mlp") return ModelKind::kMlp;
  throw ConfigError("task.model must be linear, logistic or mlp, got '" + name + "'");
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "regression") return TaskKind::kRegression;
  if (name == "binary") return TaskKind::kBinary;
  throw ConfigError("data.task must be regression or binary, got '" + name + "'");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (id.empty()) throw ConfigError("scenario.id must be nonempty");
  if (seeds < 1 || seeds > 1024) throw ConfigError("scenario.seeds must be in [1,1024]");
  data.validate();
  if (rounds < 1 || rounds > 10000) throw ConfigError("federation.rounds must be in [1,10000]");
  if (train.epochs < 1 || train.epochs > 1000) {
    throw ConfigError("federation.epochs must be in [1,1000]");
  }
  if (!(train.lr > 0.0)) throw ConfigError("federation.lr must be > 0");
  plan.validate();
  if (attack.iters < 1 || attack.iters > 100000) {
    throw ConfigError("attack.iters must be in [1,100000]");
  }
  if (!(attack.lr > 0.0)) throw ConfigError("attack.lr must be > 0");
  if (attack.target_client < 0 || attack.target_client >= data.n_clients) {
    throw ConfigError("attack.target_client out of range");
  }
  if (eps1_grid.empty()) throw ConfigError("sweep.eps1_grid must be nonempty");
  {
    std::vector<double> sorted = eps1_grid;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("sweep.eps1_grid contains duplicate values");
    }
    for (double v : sorted) {
      if (v < 0.0) throw ConfigError("sweep.eps1_grid values must be >= 0");
    }
  }
  if (bayes.corpus < 1 || bayes.corpus > 100000) {
    throw ConfigError("bayes.corpus must be in [1,100000]");
  }
  if (bayes.clients < 1 || bayes.clients > 64) {
    throw ConfigError("bayes.clients must be in [1,64]");
  }
  if (bayes.max_data_atoms < 2 || bayes.max_data_atoms > 16) {
    throw ConfigError("bayes.max_data_atoms must be in [2,16]");
  }
  if (bayes.max_param_atoms < 2 || bayes.max_param_atoms > 16) {
    throw ConfigError("bayes.max_param_atoms must be in [2,16]");
  }
  for (double a : bayes.alphas) {
    if (a < 0.0 || a > 1.0) throw ConfigError("bayes.alphas must lie in [0,1]");
  }
  if (model_kind == ModelKind::kMlp && (hidden_width < 1 || hidden_width > 16)) {
    throw ConfigError("task.hidden_width must be in [1,16]");
  }
}

ScenarioConfig parse_config_text(const std::string& text) {
  Reader reader(parse_ini(text));
  ScenarioConfig cfg;

  cfg.id = reader.get_string("scenario", "id", cfg.id);
  cfg.seeds = static_cast<int>(reader.get_int("scenario", "seeds", cfg.seeds));
  cfg.master_seed =
      static_cast<std::uint64_t>(reader.get_int("scenario", "master_seed",
                                                static_cast<std::int64_t>(cfg.master_seed)));

  cfg.model_kind = model_kind_from_string(reader.get_string("task", "model", "linear"));
  cfg.hidden_width =
      static_cast<int>(reader.get_int("task", "hidden_width", cfg.hidden_width));
  cfg.data.input_dim = static_cast<int>(reader.get_int("task", "input_dim", 4));

  cfg.data.task = task_kind_from_string(reader.get_string("data", "task", "regression"));
  cfg.data.n_clients = static_cast<int>(reader.get_int("data", "n_clients", 2));
  cfg.data.samples_per_client =
      static_cast<int>(reader.get_int("data", "samples_per_client", 1));
  cfg.data.separation = reader.get_number("data", "separation", 0.5);

  cfg.rounds = static_cast<int>(reader.get_int("federation", "rounds", 1));
  cfg.train.epochs = static_cast<int>(reader.get_int("federation", "epochs", 1));
  cfg.train.lr = reader.get_number("federation", "lr", 0.15);

  cfg.plan.mode =
      distortion_mode_from_string(reader.get_string("distortion", "mode", "identity"));
  cfg.plan.eps1 = reader.get_number("distortion", "eps1", 0.0);
  cfg.plan.eps = reader.get_number("distortion", "eps", 0.0);
  cfg.plan.sigma2_candidates =
      reader.get_list("distortion", "sigma2_candidates", cfg.plan.sigma2_candidates);
  cfg.plan.quant_levels =
      static_cast<int>(reader.get_int("distortion", "quant_levels", cfg.plan.quant_levels));
  cfg.plan.keep_fraction =
      reader.get_number("distortion", "keep_fraction", cfg.plan.keep_fraction);
  cfg.plan.inner_steps =
      static_cast<int>(reader.get_int("distortion", "inner_steps", cfg.plan.inner_steps));
  cfg.plan.inner_lr = reader.get_number("distortion", "inner_lr", cfg.plan.inner_lr);

  cfg.attack.iters = static_cast<int>(reader.get_int("attack", "iters", cfg.attack.iters));
  cfg.attack.lr = reader.get_number("attack", "lr", cfg.attack.lr);
  cfg.attack.target_client =
      static_cast<int>(reader.get_int("attack", "target_client", cfg.attack.target_client));

  cfg.eps1_grid = reader.get_list("sweep", "eps1_grid", cfg.eps1_grid);

  cfg.bayes.corpus = static_cast<int>(reader.get_int("bayes", "corpus", cfg.bayes.corpus));
  cfg.bayes.alphas = reader.get_list("bayes", "alphas", cfg.bayes.alphas);
  cfg.bayes.clients = static_cast<int>(reader.get_int("bayes", "clients", cfg.bayes.clients));
  cfg.bayes.max_data_atoms =
      static_cast<int>(reader.get_int("bayes", "max_data_atoms", cfg.bayes.max_data_atoms));
  cfg.bayes.max_param_atoms =
      static_cast<int>(reader.get_int("bayes", "max_param_atoms", cfg.bayes.max_param_atoms));

  cfg.output_dir = reader.get_string("output", "dir", cfg.output_dir);

  reader.reject_unknown({"scenario", "task", "data", "federation", "distortion", "attack",
                         "sweep", "bayes", "output"});

  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace pufl
