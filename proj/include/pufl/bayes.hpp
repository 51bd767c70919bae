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

#include <limits>
#include <vector>

#include "pufl/distributions.hpp"
#include "pufl/numerics.hpp"

namespace pufl {

// Fully enumerated world: finite data space, finite parameter space, a data
// prior, a data-posterior kernel and a utility table. All divergence and
// trade-off quantities on such a world are exact sums, no sampling anywhere.
struct FiniteWorld {
  std::vector<std::string> data_atoms;
  std::vector<std::string> param_atoms;
  DiscreteDist prior;  // f_D over data_atoms
  Matrix kernel;       // |W| x |D|, row w is f_{D|W}(.|w), each row sums to 1
  Matrix utility;      // |W| x |D|, U(w, d)

  int n_data() const { return static_cast<int>(data_atoms.size()); }
  int n_params() const { return static_cast<int>(param_atoms.size()); }
  void validate() const;

  // Mean utility of parameter atom w over the data atoms: U(w, D).
  double row_utility(int w) const { return utility.row(w).mean(); }
};

// Parameter-sharing distributions before (p_o) and after (p_d) protection.
struct ProtectionPair {
  DiscreteDist p_o;
  DiscreteDist p_d;
};

// Attacker belief over data atoms given one released parameter atom: the
// kernel row as a distribution.
DiscreteDist posterior_belief(const FiniteWorld& world, int param_index);

// Attacker belief marginalized over a parameter distribution:
//   f(d) = sum_w P(w) f_{D|W}(d|w).
DiscreteDist marginal_belief(const FiniteWorld& world, const DiscreteDist& param_dist);

// max over (w, d) of |log(f_{D|W}(d|w) / f_D(d))|. Requires strictly positive
// prior and kernel; a zero entry means unbounded leakage and throws.
double max_leakage_log(const FiniteWorld& world);

// max over (w, d) of |f_{D|W}(d|w) - f_D(d)|; always finite.
double max_leakage_tv(const FiniteWorld& world);

// Leakage under the skew-JS definition: root_e(JS_a(F_A || prior)) with
// F_A = marginal_belief(p_d).
double privacy_leakage_jsalpha(const FiniteWorld& world, const ProtectionPair& pair,
                               double alpha);

// Prior-weighted mean absolute deviation sum_d prior(d) |f_A(d) - prior(d)|.
// Note this is not the TV distance; the prior weights are kept as defined.
double privacy_leakage_tv(const FiniteWorld& world, const ProtectionPair& pair);

// E_{w~P} of the row-mean utility.
double expected_utility(const FiniteWorld& world, const DiscreteDist& param_dist);

// Mean over clients of U(p_o) - U(p_d); may be negative.
double utility_loss_bayes(const std::vector<FiniteWorld>& worlds,
                          const std::vector<ProtectionPair>& pairs);

struct MajorityGapResult {
  double delta = 0.0;
  // Set when no positive margin satisfies the mass condition, i.e. the
  // positive-gap assumption fails for this client.
  bool assumption_violated = false;
};

// Largest utility margin around the optimal parameter whose p_d mass stays
// within tv(p_d, p_o)/2. Computed by sorting the support of p_d by
// |U(w,D) - U(w*,D)| and scanning cumulative mass to the first crossing.
MajorityGapResult majority_gap(const FiniteWorld& world, const ProtectionPair& pair);

enum class TradeoffKind { kJsAlpha, kTv };

struct TradeoffReport {
  TradeoffKind kind = TradeoffKind::kJsAlpha;
  double alpha = 0.5;
  double lhs = 0.0;
  double eps_p_mean = 0.0;
  double bound_term = 0.0;
  double slack = 0.0;
  bool holds = false;

  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool gamma_defined = false;
  double delta_bar = 0.0;
  bool assumption_violated = false;

  // Second-form right-hand sides (JS kind only; recorded, not gated). The
  // two variants carry different constant factors, so both are evaluated.
  double second_rhs_main = std::numeric_limits<double>::quiet_NaN();
  bool second_holds_main = false;
  double second_rhs_alt = std::numeric_limits<double>::quiet_NaN();
  bool second_holds_alt = false;

  // TV kind: the prior-weighted leakage (privacy_leakage_tv) averaged over
  // clients, reported alongside the TV-distance term used in the bound.
  double weighted_eps_p_mean = std::numeric_limits<double>::quiet_NaN();
};

// Evaluates the first-form privacy/utility balance inequality over K clients
// and records the second-form quantities where defined.
//
// JS kind:  (1/K) sum root_e(JS_a(F*_k || prior_k))
//             <= (1/K) sum eps_p_k
//              + (1/K) sum root_e(2a(1-a)(e^{2 delta_k} - 1) tv(p_o_k, p_d_k)),
//           eps_p_k = privacy_leakage_jsalpha, delta_k = max_leakage_log.
// TV kind:  (1/K) sum tv(F*_k, prior_k)
//             <= (1/K) sum tv(F_A_k, prior_k)
//              + (1/K) sum 2 delta_k tv(p_o_k, p_d_k),
//           delta_k = max_leakage_tv. The leakage term here is the TV
//           distance between protected belief and prior; the prior-weighted
//           variant is reported in weighted_eps_p_mean.
TradeoffReport verify_tradeoff(TradeoffKind kind, const std::vector<FiniteWorld>& worlds,
                               const std::vector<ProtectionPair>& pairs,
                               const ProtectionPair& aggregated_pair, double alpha);

enum class BoundLemma { kGjsd, kDtv };

struct LemmaCheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  // rhs with the pointwise constant accumulated over the data support
  // (|D| delta tv instead of 2 delta tv); meaningful for the DTV lemma where
  // the two differ once |D| > 2.
  double rhs_support_scaled = 0.0;
  bool holds_support_scaled = false;
};

// GJSD: JS_a(F_A || F*) <= 2a(1-a)(e^{2 delta} - 1) tv(p_o, p_d).
// DTV:  tv(F_A, F*)     <= 2 delta tv(p_o, p_d).
LemmaCheckResult bound_lemma_check(BoundLemma lemma, const FiniteWorld& world,
                                   const ProtectionPair& pair, double alpha);

struct UtilityBoundResult {
  double eps_u = 0.0;
  double lower_bound = 0.0;
  bool holds = false;
  bool assumption_violated = false;
};

// eps_u >= (1/2K) sum_k gap_k * tv(aggregated p_d, aggregated p_o).
UtilityBoundResult utility_lower_bound_check(const std::vector<FiniteWorld>& worlds,
                                             const std::vector<ProtectionPair>& pairs,
                                             const ProtectionPair& aggregated_pair);

}  // namespace pufl
