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

#include "pufl/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pufl {

namespace {
constexpr double kTol = 1e-9;

void require_matching_lists(std::size_t worlds, std::size_t pairs, const char* op) {
  if (worlds != pairs) {
    throw std::invalid_argument(std::string(op) + ": worlds/pairs length mismatch");
  }
  if (worlds == 0) throw std::invalid_argument(std::string(op) + ": empty client list");
}

void require_pair(const FiniteWorld& world, const ProtectionPair& pair, const char* op) {
  if (static_cast<int>(pair.p_o.size()) != world.n_params() ||
      static_cast<int>(pair.p_d.size()) != world.n_params()) {
    throw std::invalid_argument(std::string(op) + ": pair support mismatch with world");
  }
}
}  // namespace

void FiniteWorld::validate() const {
  const int nd = n_data();
  const int nw = n_params();
  if (nd < 1 || nw < 1) throw std::invalid_argument("FiniteWorld: empty atom list");
  if (static_cast<int>(prior.size()) != nd) {
    throw std::invalid_argument("FiniteWorld: prior size mismatch");
  }
  if (kernel.rows() != nw || kernel.cols() != nd) {
    throw std::invalid_argument("FiniteWorld: kernel shape mismatch");
  }
  if (utility.rows() != nw || utility.cols() != nd) {
    throw std::invalid_argument("FiniteWorld: utility shape mismatch");
  }
  for (int w = 0; w < nw; ++w) {
    double sum = 0.0;
    for (int d = 0; d < nd; ++d) {
      const double v = kernel(w, d);
      if (!(v >= 0.0)) throw std::invalid_argument("FiniteWorld: negative kernel entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kTol) {
      throw std::invalid_argument("FiniteWorld: kernel row does not sum to 1");
    }
  }
  if (!utility.allFinite()) throw std::invalid_argument("FiniteWorld: non-finite utility");
}

DiscreteDist posterior_belief(const FiniteWorld& world, int param_index) {
  if (param_index < 0 || param_index >= world.n_params()) {
    throw std::invalid_argument("posterior_belief: unknown parameter atom");
  }
  std::vector<double> row(world.n_data());
  for (int d = 0; d < world.n_data(); ++d) row[d] = world.kernel(param_index, d);
  return DiscreteDist(world.data_atoms, std::move(row));
}

DiscreteDist marginal_belief(const FiniteWorld& world, const DiscreteDist& param_dist) {
  if (static_cast<int>(param_dist.size()) != world.n_params()) {
    throw std::invalid_argument("marginal_belief: parameter support mismatch");
  }
  std::vector<double> out(world.n_data(), 0.0);
  for (int w = 0; w < world.n_params(); ++w) {
    const double pw = param_dist.prob(w);
    if (pw == 0.0) continue;
    for (int d = 0; d < world.n_data(); ++d) out[d] += pw * world.kernel(w, d);
  }
  return DiscreteDist(world.data_atoms, std::move(out));
}

double max_leakage_log(const FiniteWorld& world) {
  double worst = 0.0;
  for (int w = 0; w < world.n_params(); ++w) {
    for (int d = 0; d < world.n_data(); ++d) {
      const double fd = world.prior.prob(d);
      const double kw = world.kernel(w, d);
      if (fd <= 0.0 || kw <= 0.0) {
        throw std::domain_error("max_leakage_log: zero prior or kernel entry, leakage unbounded");
      }
      worst = std::max(worst, std::abs(std::log(kw / fd)));
    }
  }
  return worst;
}

double max_leakage_tv(const FiniteWorld& world) {
  double worst = 0.0;
  for (int w = 0; w < world.n_params(); ++w) {
    for (int d = 0; d < world.n_data(); ++d) {
      worst = std::max(worst, std::abs(world.kernel(w, d) - world.prior.prob(d)));
    }
  }
  return worst;
}

double privacy_leakage_jsalpha(const FiniteWorld& world, const ProtectionPair& pair,
                               double alpha) {
  require_pair(world, pair, "privacy_leakage_jsalpha");
  const DiscreteDist protected_belief = marginal_belief(world, pair.p_d);
  return root_e(js_alpha(protected_belief, world.prior, alpha));
}

double privacy_leakage_tv(const FiniteWorld& world, const ProtectionPair& pair) {
  require_pair(world, pair, "privacy_leakage_tv");
  const DiscreteDist protected_belief = marginal_belief(world, pair.p_d);
  double sum = 0.0;
  for (int d = 0; d < world.n_data(); ++d) {
    sum += world.prior.prob(d) * std::abs(protected_belief.prob(d) - world.prior.prob(d));
  }
  return sum;
}

double expected_utility(const FiniteWorld& world, const DiscreteDist& param_dist) {
  if (static_cast<int>(param_dist.size()) != world.n_params()) {
    throw std::invalid_argument("expected_utility: parameter support mismatch");
  }
  double total = 0.0;
  for (int w = 0; w < world.n_params(); ++w) {
    total += param_dist.prob(w) * world.row_utility(w);
  }
  return total;
}

double utility_loss_bayes(const std::vector<FiniteWorld>& worlds,
                          const std::vector<ProtectionPair>& pairs) {
  require_matching_lists(worlds.size(), pairs.size(), "utility_loss_bayes");
  double total = 0.0;
  for (std::size_t k = 0; k < worlds.size(); ++k) {
    total += expected_utility(worlds[k], pairs[k].p_o) -
             expected_utility(worlds[k], pairs[k].p_d);
  }
  return total / static_cast<double>(worlds.size());
}

MajorityGapResult majority_gap(const FiniteWorld& world, const ProtectionPair& pair) {
  require_pair(world, pair, "majority_gap");
  double best = -std::numeric_limits<double>::infinity();
  for (int w = 0; w < world.n_params(); ++w) best = std::max(best, world.row_utility(w));

  // Support atoms of p_d ordered by their utility margin to the optimum.
  struct Atom {
    double margin;
    double mass;
  };
  std::vector<Atom> atoms;
  double support_mass = 0.0;
  for (int w = 0; w < world.n_params(); ++w) {
    const double m = pair.p_d.prob(w);
    if (m <= 0.0) continue;
    atoms.push_back({std::abs(world.row_utility(w) - best), m});
    support_mass += m;
  }
  if (atoms.empty()) throw std::invalid_argument("majority_gap: empty p_d support");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.margin < b.margin; });

  const double threshold = tv(pair.p_d, pair.p_o) / 2.0;

  // Cumulative mass is a step function of the margin; the gap is the margin
  // value at which it first exceeds the threshold (the supremum of margins
  // whose mass stays within it). Ties on the margin are grouped so the mass
  // jumps once per distinct value. Total mass is 1 > threshold, so a crossing
  // always exists; a crossing at margin 0 means no positive gap qualifies.
  double cumulative = 0.0;
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double margin = atoms[i].margin;
    double group = 0.0;
    while (i < atoms.size() && atoms[i].margin == margin) {
      group += atoms[i].mass;
      ++i;
    }
    cumulative += group;
    if (cumulative > threshold + kTol) {
      if (margin <= 0.0) return {0.0, true};
      return {margin, false};
    }
  }
  // Entire support mass fits under the threshold; no finite crossing, so any
  // margin qualifies. Can only happen for degenerate sub-normalized inputs.
  return {atoms.back().margin, false};
}

namespace {

double js_bound_rhs(double alpha, double max_leak_log, double pair_tv) {
  return 2.0 * alpha * (1.0 - alpha) * (std::exp(2.0 * max_leak_log) - 1.0) * pair_tv;
}

}  // namespace

TradeoffReport verify_tradeoff(TradeoffKind kind, const std::vector<FiniteWorld>& worlds,
                               const std::vector<ProtectionPair>& pairs,
                               const ProtectionPair& aggregated_pair, double alpha) {
  require_matching_lists(worlds.size(), pairs.size(), "verify_tradeoff");
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("verify_tradeoff: alpha out of [0,1]");
  }
  const double K = static_cast<double>(worlds.size());

  TradeoffReport report;
  report.kind = kind;
  report.alpha = alpha;

  double lhs = 0.0;
  double eps_p = 0.0;
  double bound = 0.0;
  double weighted_eps_p = 0.0;
  double tv_root_sum = 0.0;
  double max_leak_all = 0.0;

  for (std::size_t k = 0; k < worlds.size(); ++k) {
    const FiniteWorld& world = worlds[k];
    const ProtectionPair& pair = pairs[k];
    require_pair(world, pair, "verify_tradeoff");
    const DiscreteDist unprotected_belief = marginal_belief(world, pair.p_o);
    const double pair_tv = tv(pair.p_o, pair.p_d);
    tv_root_sum += root_e(pair_tv);

    if (kind == TradeoffKind::kJsAlpha) {
      const double leak = max_leakage_log(world);
      max_leak_all = std::max(max_leak_all, leak);
      lhs += root_e(js_alpha(unprotected_belief, world.prior, alpha));
      eps_p += privacy_leakage_jsalpha(world, pair, alpha);
      bound += root_e(js_bound_rhs(alpha, leak, pair_tv));
    } else {
      const double leak = max_leakage_tv(world);
      max_leak_all = std::max(max_leak_all, leak);
      const DiscreteDist protected_belief = marginal_belief(world, pair.p_d);
      lhs += tv(unprotected_belief, world.prior);
      eps_p += tv(protected_belief, world.prior);
      weighted_eps_p += privacy_leakage_tv(world, pair);
      bound += 2.0 * leak * pair_tv;
    }
  }
  lhs /= K;
  eps_p /= K;
  bound /= K;

  report.lhs = lhs;
  report.eps_p_mean = eps_p;
  report.bound_term = bound;
  report.slack = eps_p + bound - lhs;
  report.holds = lhs <= eps_p + bound + kTol;
  if (kind == TradeoffKind::kTv) report.weighted_eps_p_mean = weighted_eps_p / K;

  // Majority gaps and the second form. Gaps use each client's own pair; the
  // gamma ratio uses the aggregated pair, which is a scenario input.
  double delta_bar = 0.0;
  bool violated = false;
  for (std::size_t k = 0; k < worlds.size(); ++k) {
    const MajorityGapResult gap = majority_gap(worlds[k], pairs[k]);
    violated = violated || gap.assumption_violated;
    delta_bar += gap.delta;
  }
  report.delta_bar = delta_bar;
  report.assumption_violated = violated;

  const double aggregated_tv = tv(aggregated_pair.p_o, aggregated_pair.p_d);
  if (aggregated_tv > 0.0) {
    report.gamma = (tv_root_sum / K) / aggregated_tv;
    report.gamma_defined = true;
  }

  if (kind == TradeoffKind::kJsAlpha && report.gamma_defined && !violated &&
      delta_bar > 0.0) {
    const double util_loss = utility_loss_bayes(worlds, pairs);
    const double base = 2.0 * alpha * (1.0 - alpha) * (std::exp(2.0 * max_leak_all) - 1.0);
    report.second_rhs_main =
        eps_p + 2.0 * report.gamma * root_e(base) * util_loss / delta_bar;
    report.second_holds_main = lhs <= report.second_rhs_main + kTol;
    report.second_rhs_alt =
        eps_p + report.gamma * base * util_loss / delta_bar;
    report.second_holds_alt = lhs <= report.second_rhs_alt + kTol;
  }
  return report;
}

LemmaCheckResult bound_lemma_check(BoundLemma lemma, const FiniteWorld& world,
                                   const ProtectionPair& pair, double alpha) {
  require_pair(world, pair, "bound_lemma_check");
  const DiscreteDist protected_belief = marginal_belief(world, pair.p_d);
  const DiscreteDist unprotected_belief = marginal_belief(world, pair.p_o);
  const double pair_tv = tv(pair.p_o, pair.p_d);

  LemmaCheckResult result;
  if (lemma == BoundLemma::kGjsd) {
    const double leak = max_leakage_log(world);
    result.lhs = js_alpha(protected_belief, unprotected_belief, alpha);
    result.rhs = js_bound_rhs(alpha, leak, pair_tv);
    result.rhs_support_scaled = result.rhs;
  } else {
    const double leak = max_leakage_tv(world);
    result.lhs = tv(protected_belief, unprotected_belief);
    result.rhs = 2.0 * leak * pair_tv;
    result.rhs_support_scaled = static_cast<double>(world.n_data()) * leak * pair_tv;
  }
  result.holds = result.lhs <= result.rhs + kTol;
  result.holds_support_scaled = result.lhs <= result.rhs_support_scaled + kTol;
  return result;
}

UtilityBoundResult utility_lower_bound_check(const std::vector<FiniteWorld>& worlds,
                                             const std::vector<ProtectionPair>& pairs,
                                             const ProtectionPair& aggregated_pair) {
  require_matching_lists(worlds.size(), pairs.size(), "utility_lower_bound_check");
  const double K = static_cast<double>(worlds.size());

  UtilityBoundResult result;
  double gap_sum = 0.0;
  for (std::size_t k = 0; k < worlds.size(); ++k) {
    const MajorityGapResult gap = majority_gap(worlds[k], pairs[k]);
    result.assumption_violated = result.assumption_violated || gap.assumption_violated;
    gap_sum += gap.delta;
  }
  result.eps_u = utility_loss_bayes(worlds, pairs);
  result.lower_bound =
      gap_sum * tv(aggregated_pair.p_o, aggregated_pair.p_d) / (2.0 * K);
  result.holds = result.eps_u >= result.lower_bound - kTol;
  return result;
}

}  // namespace pufl
