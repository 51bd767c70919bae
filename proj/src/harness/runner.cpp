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

#include "pufl/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "pufl/distort.hpp"
#include "pufl/rng.hpp"
#include "pufl/worldgen.hpp"

namespace pufl {

namespace {

// Runs `count` tasks on `jobs` workers; each task writes only its own slot,
// so scheduling can never affect results.
template <typename Fn>
void parallel_for(int count, int jobs, const Fn& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

struct PipelineOutput {
  std::vector<MetricsRecord> rows;
  std::vector<HistoryRecord> history;
  std::vector<AttackTrace> traces;        // one per round
  std::vector<Dataset> trace_targets;     // attacked client's distorted data
  std::vector<double> deltas;             // distortion extent per round
  Dataset clean_target;
  int clamp_events = 0;
  double round1_eps_p = 0.0;
  double round1_delta = 0.0;
  double final_eps_u = 0.0;
};

PipelineOutput run_pipeline(const ScenarioConfig& config, int seed_index, double eps1) {
  PipelineOutput out;

  FederationConfig fed;
  fed.data = config.data;
  fed.model_kind = config.model_kind;
  fed.hidden_width = config.model_kind == ModelKind::kMlp ? config.hidden_width : 0;
  fed.rounds = config.rounds;
  fed.train = config.train;
  fed.seed = derive_seed(config.master_seed, "pipeline", static_cast<std::uint64_t>(seed_index));

  DistortionPlan plan = config.plan;
  plan.eps1 = eps1;
  plan.seed = derive_seed(config.master_seed, "distort", static_cast<std::uint64_t>(seed_index));

  const int target = config.attack.target_client;
  const double max_distance = std::sqrt(static_cast<double>(config.data.input_dim));
  const std::vector<Dataset> clean = generate_synthetic(fed.data, fed.seed);
  out.clean_target = clean[target];

  const std::uint64_t attack_base =
      derive_seed(config.master_seed, "attack", static_cast<std::uint64_t>(seed_index));

  const DistortionHook hook = make_distortion_hook(plan);
  Model model_template = Model::make(fed.model_kind, fed.data.input_dim, fed.hidden_width);

  const auto observer = [&](const RoundRecord& record) {
    const int r = record.round_index;
    // The exposed update is one (or epochs) local descent steps; the
    // first-step-equivalent gradient is the inversion target.
    const Vector theta_obs =
        -record.client_updates[target] /
        (config.train.lr * static_cast<double>(config.train.epochs));
    Model round_model = model_template;
    round_model.params = record.global_params_before;

    AttackTrace trace = invert(round_model, theta_obs, clean[target].size(),
                               fed.data.input_dim, clean[target].labels,
                               config.attack.iters, config.attack.lr,
                               derive_seed(attack_base, "attack-round",
                                           static_cast<std::uint64_t>(r)));
    const LeakageDetail leak = privacy_leakage_detail(trace, clean[target], max_distance);
    if (leak.clamped) ++out.clamp_events;

    const Dataset& distorted_target = record.distorted[target];
    const double delta = distortion_extent(distorted_target, clean[target]);

    Model after = model_template;
    after.params = record.global_params_after;
    double eps_u = 0.0;
    for (std::size_t k = 0; k < record.distorted.size(); ++k) {
      eps_u += utility_loss_empirical(after, clean[k], record.distorted[k]);
    }
    eps_u /= static_cast<double>(record.distorted.size());

    MetricsRecord row;
    row.scenario = config.id;
    row.seed = seed_index;
    row.eps1 = eps1;
    row.round = r;
    row.eps_p = leak.value;
    row.eps_u = eps_u;
    row.delta_extent = delta;
    out.rows.push_back(row);

    for (std::size_t k = 0; k < record.client_updates.size(); ++k) {
      HistoryRecord h;
      h.scenario = config.id;
      h.seed = seed_index;
      h.eps1 = eps1;
      h.round = r;
      h.client = static_cast<int>(k);
      h.update_norm = record.client_updates[k].norm();
      h.clean_loss = loss_mean(after, clean[k]);
      out.history.push_back(h);
    }
    HistoryRecord global;
    global.scenario = config.id;
    global.seed = seed_index;
    global.eps1 = eps1;
    global.round = r;
    global.client = -1;
    global.clean_loss = record.clean_loss_after;
    out.history.push_back(global);

    if (r == 0) {
      out.round1_eps_p = leak.value;
      out.round1_delta = delta;
    }
    out.final_eps_u = eps_u;
    out.traces.push_back(std::move(trace));
    out.trace_targets.push_back(distorted_target);
    out.deltas.push_back(delta);
  };

  run_federation(fed, hook, observer);
  return out;
}

AttackTrace prefix_of(const AttackTrace& trace, std::size_t len) {
  AttackTrace out;
  out.labels = trace.labels;
  out.iterates.assign(trace.iterates.begin(), trace.iterates.begin() + len);
  out.mismatch.assign(trace.mismatch.begin(), trace.mismatch.begin() + len);
  return out;
}

// Probe pairs for the envelope constants: for every trace, the iterate with
// the worst distance/mismatch ratio against its target (that single pair
// makes c_b dominate the whole trace), the final iterate, plus clean/target
// and cross-target pairs for coverage.
std::vector<std::pair<Dataset, Dataset>> build_probes(
    const std::vector<PipelineOutput>& pipelines) {
  std::vector<std::pair<Dataset, Dataset>> probes;
  for (const PipelineOutput& p : pipelines) {
    for (std::size_t t = 0; t < p.traces.size(); ++t) {
      const AttackTrace& trace = p.traces[t];
      const Dataset& tgt = p.trace_targets[t];
      double worst = -1.0;
      std::size_t worst_i = 0;
      for (std::size_t i = 0; i < trace.length(); ++i) {
        if (trace.mismatch[i] <= 1e-12) continue;
        double dist = 0.0;
        for (int m = 0; m < tgt.features.rows(); ++m) {
          dist += (trace.iterates[i].row(m) - tgt.features.row(m)).norm();
        }
        const double ratio = dist / trace.mismatch[i];
        if (ratio > worst) {
          worst = ratio;
          worst_i = i;
        }
      }
      if (worst >= 0.0) {
        probes.emplace_back(Dataset(trace.iterates[worst_i], trace.labels), tgt);
      }
      probes.emplace_back(Dataset(trace.iterates.back(), trace.labels), tgt);
      probes.emplace_back(p.clean_target, tgt);
    }
  }
  // Cross-pipeline target pairs for spread.
  for (std::size_t a = 0; a + 1 < pipelines.size() && a < 8; ++a) {
    if (pipelines[a].trace_targets.empty() || pipelines[a + 1].trace_targets.empty()) continue;
    probes.emplace_back(pipelines[a].trace_targets.front(),
                        pipelines[a + 1].trace_targets.front());
  }
  return probes;
}

}  // namespace

ScenarioRunResult run_scenario(const ScenarioConfig& config,
                               const std::vector<double>& eps1_grid, int jobs) {
  config.validate();
  if (eps1_grid.empty()) throw ConfigError("eps1 grid must be nonempty");
  {
    std::set<double> unique(eps1_grid.begin(), eps1_grid.end());
    if (unique.size() != eps1_grid.size()) {
      throw ConfigError("eps1 grid contains duplicate values");
    }
  }

  const int tasks = static_cast<int>(eps1_grid.size()) * config.seeds;
  std::vector<PipelineOutput> pipelines(tasks);
  parallel_for(tasks, jobs, [&](int i) {
    const int grid_index = i / config.seeds;
    const int seed_index = i % config.seeds;
    pipelines[i] = run_pipeline(config, seed_index, eps1_grid[grid_index]);
  });

  ScenarioRunResult result;

  // Envelope constants fitted on the whole family of traces. All runs share
  // the iteration budget, so two prefix copies of the first trace provide the
  // distinct lengths the fit requires.
  std::vector<AttackTrace> family;
  for (const PipelineOutput& p : pipelines) {
    for (const AttackTrace& t : p.traces) family.push_back(t);
  }
  if (!family.empty() && family.front().length() >= 8) {
    family.push_back(prefix_of(family.front(), family.front().length() / 2));
    family.push_back(prefix_of(family.front(), family.front().length() / 4));
  }
  const Model model_template = Model::make(
      config.model_kind, config.data.input_dim,
      config.model_kind == ModelKind::kMlp ? config.hidden_width : 0);
  result.constants = fit_constants(family, build_probes(pipelines), model_template);

  const double max_distance = std::sqrt(static_cast<double>(config.data.input_dim));
  for (PipelineOutput& p : pipelines) {
    result.clamp_events += p.clamp_events;
    for (MetricsRecord& row : p.rows) {
      row.c2 = result.constants.c2;
      row.cb = result.constants.c_b;
      row.p_exp = result.constants.p;
      const LeakageBound bound = leakage_upper_bound(*row.delta_extent, config.attack.iters,
                                                     result.constants, max_distance);
      row.leak_bound = bound.bound;
      row.gate = bound.gate_satisfied;
      if (bound.gate_satisfied) {
        ++result.gate_satisfied_runs;
        if (*row.eps_p > bound.bound + 0.05) ++result.bound_violations;
      }
      result.rows.push_back(row);
    }
    for (HistoryRecord& h : p.history) result.history.push_back(std::move(h));
  }

  for (std::size_t g = 0; g < eps1_grid.size(); ++g) {
    FrontierRow row;
    row.eps1 = eps1_grid[g];
    double sum_p = 0.0, sum_u = 0.0, sum_d = 0.0, sum_b = 0.0;
    for (int s = 0; s < config.seeds; ++s) {
      const PipelineOutput& p = pipelines[g * config.seeds + s];
      sum_p += p.round1_eps_p;
      sum_u += p.final_eps_u;
      sum_d += p.round1_delta;
      sum_b += leakage_upper_bound(p.round1_delta, config.attack.iters, result.constants,
                                   max_distance)
                   .bound;
    }
    row.mean_eps_p = sum_p / config.seeds;
    row.mean_eps_u = sum_u / config.seeds;
    row.mean_delta = sum_d / config.seeds;
    row.mean_bound = sum_b / config.seeds;
    row.eps1_thm_threshold = epsilon1_threshold(
        std::clamp(row.mean_eps_p, 0.0, 1.0), max_distance, result.constants,
        config.attack.iters);
    result.frontier.push_back(row);
  }
  return result;
}

ScenarioRunResult run_scenario(const ScenarioConfig& config, int jobs) {
  return run_scenario(config, {config.plan.eps1}, jobs);
}

ScenarioRunResult sweep_frontier(const ScenarioConfig& config,
                                 const std::vector<double>& eps1_grid, int jobs) {
  return run_scenario(config, eps1_grid, jobs);
}

namespace {

void push_lemma_rows(const VerificationUnit& unit, int unit_index,
                     const std::vector<double>& alphas, std::vector<BayesCheckRow>& rows) {
  for (std::size_t k = 0; k < unit.worlds.size(); ++k) {
    {
      const LemmaCheckResult r =
          bound_lemma_check(BoundLemma::kDtv, unit.worlds[k], unit.pairs[k], 0.5);
      BayesCheckRow row;
      row.unit = unit_index;
      row.client = static_cast<int>(k);
      row.check = "lemma_dtv";
      row.lhs = r.lhs;
      row.rhs = r.rhs;
      row.slack = r.rhs - r.lhs;
      row.holds = r.holds;
      row.aux = r.rhs_support_scaled;
      row.aux_flag = r.holds_support_scaled;
      rows.push_back(row);
    }
    for (double alpha : alphas) {
      const LemmaCheckResult r =
          bound_lemma_check(BoundLemma::kGjsd, unit.worlds[k], unit.pairs[k], alpha);
      BayesCheckRow row;
      row.unit = unit_index;
      row.client = static_cast<int>(k);
      row.alpha = alpha;
      row.check = "lemma_gjsd";
      row.lhs = r.lhs;
      row.rhs = r.rhs;
      row.slack = r.rhs - r.lhs;
      row.holds = r.holds;
      rows.push_back(row);
    }
  }
}

void push_tradeoff_rows(const VerificationUnit& unit, int unit_index,
                        const std::vector<double>& alphas,
                        std::vector<BayesCheckRow>& rows) {
  for (double alpha : alphas) {
    const TradeoffReport r = verify_tradeoff(TradeoffKind::kJsAlpha, unit.worlds,
                                             unit.pairs, unit.aggregated, alpha);
    BayesCheckRow row;
    row.unit = unit_index;
    row.alpha = alpha;
    row.check = "thm1_first";
    row.lhs = r.lhs;
    row.rhs = r.eps_p_mean + r.bound_term;
    row.slack = r.slack;
    row.holds = r.holds;
    rows.push_back(row);

    if (std::isfinite(r.second_rhs_main)) {
      BayesCheckRow second = row;
      second.check = "thm1_second_main";
      second.rhs = r.second_rhs_main;
      second.slack = r.second_rhs_main - r.lhs;
      second.holds = r.second_holds_main;
      second.aux = r.gamma;
      second.aux_flag = std::nullopt;
      rows.push_back(second);

      second.check = "thm1_second_alt";
      second.rhs = r.second_rhs_alt;
      second.slack = r.second_rhs_alt - r.lhs;
      second.holds = r.second_holds_alt;
      second.aux = r.delta_bar;
      rows.push_back(second);
    }
  }
  {
    const TradeoffReport r = verify_tradeoff(TradeoffKind::kTv, unit.worlds, unit.pairs,
                                             unit.aggregated, 0.5);
    BayesCheckRow row;
    row.unit = unit_index;
    row.check = "thm2_first";
    row.lhs = r.lhs;
    row.rhs = r.eps_p_mean + r.bound_term;
    row.slack = r.slack;
    row.holds = r.holds;
    row.aux = r.weighted_eps_p_mean;
    rows.push_back(row);
  }
}

}  // namespace

BayesSuiteResult verify_bayes_suite(const ScenarioConfig& config, int jobs) {
  config.validate();
  const BayesSpec& spec = config.bayes;

  std::vector<std::vector<BayesCheckRow>> per_unit(spec.corpus);
  parallel_for(spec.corpus, jobs, [&](int i) {
    const VerificationUnit unit =
        random_unit(derive_seed(config.master_seed, "bayes-unit", i), spec.clients,
                    spec.max_data_atoms, spec.max_param_atoms);
    push_lemma_rows(unit, i, spec.alphas, per_unit[i]);
    push_tradeoff_rows(unit, i, spec.alphas, per_unit[i]);

    const VerificationUnit premise =
        premise_unit(derive_seed(config.master_seed, "bayes-premise", i), spec.clients,
                     spec.max_data_atoms, spec.max_param_atoms);
    const UtilityBoundResult u =
        utility_lower_bound_check(premise.worlds, premise.pairs, premise.aggregated);
    BayesCheckRow row;
    row.unit = i;
    row.check = "utility_bound";
    row.lhs = u.lower_bound;
    row.rhs = u.eps_u;
    row.slack = u.eps_u - u.lower_bound;
    row.holds = u.holds;
    row.aux_flag = u.assumption_violated;
    per_unit[i].push_back(row);
  });

  BayesSuiteResult result;
  static const std::set<std::string> gated = {"lemma_gjsd", "lemma_dtv", "thm1_first",
                                              "thm2_first", "utility_bound"};
  for (std::vector<BayesCheckRow>& rows : per_unit) {
    for (BayesCheckRow& row : rows) {
      if (gated.count(row.check) > 0) {
        ++result.checks;
        if (!row.holds) ++result.violations;
        if (row.check == "utility_bound") ++result.premise_units;
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string history_to_csv(std::vector<HistoryRecord> rows) {
  std::sort(rows.begin(), rows.end(), [](const HistoryRecord& a, const HistoryRecord& b) {
    return std::tie(a.scenario, a.seed, a.eps1, a.round, a.client) <
           std::tie(b.scenario, b.seed, b.eps1, b.round, b.client);
  });
  std::ostringstream out;
  out << "# pufl-history-v1\n";
  out << "scenario,seed,eps1,round,client,update_norm,clean_loss\n";
  for (const HistoryRecord& r : rows) {
    out << r.scenario << ',' << r.seed << ',' << format_double(r.eps1) << ',' << r.round
        << ',' << r.client << ',' << (r.update_norm ? format_double(*r.update_norm) : "")
        << ',' << format_double(r.clean_loss) << '\n';
  }
  return out.str();
}

std::string frontier_to_csv(const std::vector<FrontierRow>& rows) {
  std::ostringstream out;
  out << "# pufl-frontier-v1\n";
  out << "eps1,mean_eps_p,mean_eps_u,mean_delta,mean_bound,eps1_threshold\n";
  for (const FrontierRow& r : rows) {
    out << format_double(r.eps1) << ',' << format_double(r.mean_eps_p) << ','
        << format_double(r.mean_eps_u) << ',' << format_double(r.mean_delta) << ','
        << format_double(r.mean_bound) << ',' << format_double(r.eps1_thm_threshold) << '\n';
  }
  return out.str();
}

std::string bayes_to_csv(std::vector<BayesCheckRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const BayesCheckRow& a, const BayesCheckRow& b) {
    const double aa = a.alpha.value_or(-1.0);
    const double bb = b.alpha.value_or(-1.0);
    return std::tie(a.unit, a.client, a.check, aa) < std::tie(b.unit, b.client, b.check, bb);
  });
  std::ostringstream out;
  out << "# pufl-bayes-v1\n";
  out << "unit,client,alpha,check,lhs,rhs,slack,holds,aux,aux_flag\n";
  for (const BayesCheckRow& r : rows) {
    out << r.unit << ',' << r.client << ','
        << (r.alpha ? format_double(*r.alpha) : std::string()) << ',' << r.check << ','
        << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
        << format_double(r.slack) << ',' << (r.holds ? 1 : 0) << ','
        << (r.aux ? format_double(*r.aux) : std::string()) << ','
        << (r.aux_flag ? (*r.aux_flag ? "1" : "0") : "") << '\n';
  }
  return out.str();
}

}  // namespace pufl
