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

#include <doctest.h>

#include <cmath>

#include "pufl/bayes.hpp"
#include "pufl/worldgen.hpp"

using namespace pufl;

namespace {

FiniteWorld make_world(const std::vector<double>& prior,
                       const std::vector<std::vector<double>>& kernel,
                       const std::vector<std::vector<double>>& utility) {
  FiniteWorld w;
  const int nd = static_cast<int>(prior.size());
  const int nw = static_cast<int>(kernel.size());
  for (int i = 0; i < nd; ++i) w.data_atoms.push_back("d" + std::to_string(i));
  for (int i = 0; i < nw; ++i) w.param_atoms.push_back("w" + std::to_string(i));
  w.prior = DiscreteDist(w.data_atoms, prior);
  w.kernel.resize(nw, nd);
  w.utility.resize(nw, nd);
  for (int r = 0; r < nw; ++r) {
    for (int c = 0; c < nd; ++c) {
      w.kernel(r, c) = kernel[r][c];
      w.utility(r, c) = utility[r][c];
    }
  }
  w.validate();
  return w;
}

std::vector<std::vector<double>> const_utility(int nw, int nd, double v) {
  return std::vector<std::vector<double>>(nw, std::vector<double>(nd, v));
}

}  // namespace

TEST_CASE("posterior and marginal beliefs") {
  const FiniteWorld w = make_world({0.5, 0.5}, {{0.5, 0.5}, {1.0, 0.0}},
                                   const_utility(2, 2, 0.0));
  CHECK(posterior_belief(w, 0).prob(0) == doctest::Approx(0.5));
  CHECK(posterior_belief(w, 1).prob(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(posterior_belief(w, 2), std::invalid_argument);

  // point mass reproduces the row
  const DiscreteDist pm = DiscreteDist::point_mass(1, 2);
  CHECK(tv(marginal_belief(w, pm), posterior_belief(w, 1)) == doctest::Approx(0.0));

  // orthogonal rows under a uniform parameter distribution
  const FiniteWorld w2 = make_world({0.5, 0.5}, {{1.0, 0.0}, {0.0, 1.0}},
                                    const_utility(2, 2, 0.0));
  const DiscreteDist mix = marginal_belief(w2, DiscreteDist::uniform(2));
  CHECK(mix.prob(0) == doctest::Approx(0.5));

  // all rows equal to the prior: marginal is the prior for any distribution
  const FiniteWorld w3 = make_world({0.3, 0.7}, {{0.3, 0.7}, {0.3, 0.7}},
                                    const_utility(2, 2, 0.0));
  CHECK(tv(marginal_belief(w3, DiscreteDist::from_probs({0.2, 0.8})), w3.prior) ==
        doctest::Approx(0.0));
  for (int i = 0; i < 2; ++i) {
    CHECK(tv(posterior_belief(w3, i), w3.prior) == doctest::Approx(0.0));
  }
}

TEST_CASE("marginal belief is a pointwise convex combination of rows") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int nd = 2 + static_cast<int>(rng.below(3));
    const int nw = 2 + static_cast<int>(rng.below(4));
    const FiniteWorld w = random_world(rng, nd, nw);
    const DiscreteDist p = random_dist(rng, nw);
    const DiscreteDist m = marginal_belief(w, p);
    double sum = 0.0;
    for (int d = 0; d < nd; ++d) {
      sum += m.prob(d);
      const double lo = w.kernel.col(d).minCoeff();
      const double hi = w.kernel.col(d).maxCoeff();
      CHECK(m.prob(d) >= lo - 1e-12);
      CHECK(m.prob(d) <= hi + 1e-12);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("max leakage") {
  const FiniteWorld flat = make_world({0.5, 0.5}, {{0.5, 0.5}}, const_utility(1, 2, 0.0));
  CHECK(max_leakage_log(flat) == doctest::Approx(0.0));
  CHECK(max_leakage_tv(flat) == doctest::Approx(0.0));

  // the log ratio is asymmetric: the 0.25 entry dominates with |ln(0.25/0.5)|
  const FiniteWorld skew = make_world({0.5, 0.5}, {{0.75, 0.25}}, const_utility(1, 2, 0.0));
  CHECK(max_leakage_log(skew) == doctest::Approx(std::log(2.0)));
  CHECK(max_leakage_tv(skew) == doctest::Approx(0.25));
  const FiniteWorld mild = make_world({0.5, 0.5}, {{0.6, 0.4}}, const_utility(1, 2, 0.0));
  CHECK(max_leakage_log(mild) == doctest::Approx(std::log(0.5 / 0.4)));

  const FiniteWorld zero = make_world({0.5, 0.5}, {{1.0, 0.0}}, const_utility(1, 2, 0.0));
  CHECK_THROWS_AS(max_leakage_log(zero), std::domain_error);
  CHECK(max_leakage_tv(zero) == doctest::Approx(0.5));
}

TEST_CASE("privacy leakage, skew JS definition") {
  const FiniteWorld w = make_world({0.5, 0.5}, {{0.9, 0.1}, {0.1, 0.9}},
                                   const_utility(2, 2, 0.0));
  const ProtectionPair pm{DiscreteDist::uniform(2), DiscreteDist::point_mass(0, 2)};

  // flat world leaks nothing
  const FiniteWorld flat = make_world({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}},
                                      const_utility(2, 2, 0.0));
  CHECK(privacy_leakage_jsalpha(flat, pm, 0.5) == doctest::Approx(0.0));
  CHECK(privacy_leakage_jsalpha(w, pm, 0.0) == doctest::Approx(0.0));
  CHECK(privacy_leakage_jsalpha(w, pm, 1.0) == doctest::Approx(0.0));

  // hand-written KL sum for the 2x2 world: F_A = (0.9, 0.1), prior (0.5, 0.5),
  // mixture (0.7, 0.3)
  const double js_by_hand =
      0.5 * (0.9 * std::log(0.9 / 0.7) + 0.1 * std::log(0.1 / 0.3)) +
      0.5 * (0.5 * std::log(0.5 / 0.7) + 0.5 * std::log(0.5 / 0.3));
  CHECK(privacy_leakage_jsalpha(w, pm, 0.5) == doctest::Approx(root_e(js_by_hand)));
}

TEST_CASE("privacy leakage, prior-weighted definition") {
  const FiniteWorld flat = make_world({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}},
                                      const_utility(2, 2, 0.0));
  const ProtectionPair pair{DiscreteDist::uniform(2), DiscreteDist::uniform(2)};
  CHECK(privacy_leakage_tv(flat, pair) == doctest::Approx(0.0));

  const FiniteWorld w = make_world({0.5, 0.5}, {{0.75, 0.25}, {0.75, 0.25}},
                                   const_utility(2, 2, 0.0));
  CHECK(privacy_leakage_tv(w, pair) == doctest::Approx(0.25));

  // independent double-loop summation oracle on random worlds
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int nd = 2 + static_cast<int>(rng.below(3));
    const int nw = 2 + static_cast<int>(rng.below(4));
    const FiniteWorld rw = random_world(rng, nd, nw);
    const ProtectionPair rp = random_pair(rng, nw);
    double oracle = 0.0;
    for (int d = 0; d < nd; ++d) {
      double fa = 0.0;
      for (int wi = 0; wi < nw; ++wi) fa += rp.p_d.prob(wi) * rw.kernel(wi, d);
      oracle += rw.prior.prob(d) * std::abs(fa - rw.prior.prob(d));
    }
    CHECK(privacy_leakage_tv(rw, rp) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("expected utility and Bayesian utility loss") {
  const FiniteWorld w = make_world({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}},
                                   {{0.8, 1.0}, {0.2, 0.4}});
  CHECK(expected_utility(w, DiscreteDist::point_mass(0, 2)) == doctest::Approx(0.9));
  CHECK(expected_utility(w, DiscreteDist::point_mass(1, 2)) == doctest::Approx(0.3));
  CHECK(expected_utility(w, DiscreteDist::uniform(2)) == doctest::Approx(0.6));

  const FiniteWorld c = make_world({0.5, 0.5}, {{0.5, 0.5}}, const_utility(1, 2, 0.42));
  CHECK(expected_utility(c, DiscreteDist::point_mass(0, 1)) == doctest::Approx(0.42));

  // p_o = p_d across clients
  const ProtectionPair same{DiscreteDist::uniform(2), DiscreteDist::uniform(2)};
  CHECK(utility_loss_bayes({w, w}, {same, same}) == doctest::Approx(0.0));

  // K=1 with utilities 0.9 vs 0.3 under the two point masses
  const ProtectionPair swap{DiscreteDist::point_mass(0, 2), DiscreteDist::point_mass(1, 2)};
  CHECK(utility_loss_bayes({w}, {swap}) == doctest::Approx(0.6));

  // K=2 mean of per-client losses
  const FiniteWorld w2 = make_world({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}},
                                    {{0.5, 0.5}, {0.3, 0.3}});
  CHECK(utility_loss_bayes({w, w2}, {swap, swap}) == doctest::Approx((0.6 + 0.2) / 2.0));

  CHECK_THROWS_AS(utility_loss_bayes({w}, {same, same}), std::invalid_argument);
}

TEST_CASE("majority gap") {
  // three atoms with utilities 1.0, 0.5, 0.2
  const FiniteWorld w = make_world(
      {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}},
      {{1.0, 1.0}, {0.5, 0.5}, {0.2, 0.2}});

  // p_d = p_o with the optimum in the support: no positive margin qualifies
  const ProtectionPair same{DiscreteDist::uniform(3), DiscreteDist::uniform(3)};
  const MajorityGapResult g1 = majority_gap(w, same);
  CHECK(g1.delta == doctest::Approx(0.0));
  CHECK(g1.assumption_violated);

  // p_d point mass on the unique optimum, p_o disjoint
  const ProtectionPair disjoint{DiscreteDist::point_mass(1, 3), DiscreteDist::point_mass(0, 3)};
  const MajorityGapResult g2 = majority_gap(w, disjoint);
  CHECK(g2.delta == doctest::Approx(0.0));
  CHECK(g2.assumption_violated);

  // margin scan: p_d = (0.2, 0.3, 0.5), p_o point mass on the optimum;
  // tv = 0.8, threshold 0.4, cumulative mass crosses at margin 0.5
  const ProtectionPair scan{DiscreteDist::point_mass(0, 3),
                            DiscreteDist::from_probs({0.2, 0.3, 0.5})};
  const MajorityGapResult g3 = majority_gap(w, scan);
  CHECK_FALSE(g3.assumption_violated);
  CHECK(g3.delta == doctest::Approx(0.5));
}

TEST_CASE("majority gap agrees with a brute-force margin scan") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const int nd = 2 + static_cast<int>(rng.below(3));
    const int nw = 2 + static_cast<int>(rng.below(4));
    const FiniteWorld w = random_world(rng, nd, nw);
    const ProtectionPair pair = random_pair(rng, nw);
    const MajorityGapResult got = majority_gap(w, pair);

    // oracle: walk every distinct margin in increasing order and find the
    // first whose closed-ball p_d mass exceeds tv/2
    double best = -1.0;
    for (int i = 0; i < nw; ++i) best = std::max(best, w.row_utility(i));
    std::vector<double> margins;
    for (int i = 0; i < nw; ++i) {
      if (pair.p_d.prob(i) > 0.0) margins.push_back(std::abs(w.row_utility(i) - best));
    }
    std::sort(margins.begin(), margins.end());
    margins.erase(std::unique(margins.begin(), margins.end()), margins.end());
    const double threshold = tv(pair.p_d, pair.p_o) / 2.0;
    double expected = margins.back();
    bool expected_flag = false;
    for (double m : margins) {
      double mass = 0.0;
      for (int i = 0; i < nw; ++i) {
        if (pair.p_d.prob(i) > 0.0 && std::abs(w.row_utility(i) - best) <= m) {
          mass += pair.p_d.prob(i);
        }
      }
      if (mass > threshold + 1e-9) {
        expected = m;
        expected_flag = m <= 0.0;
        break;
      }
    }
    CHECK(got.delta == doctest::Approx(expected));
    CHECK(got.assumption_violated == expected_flag);
  }
}

TEST_CASE("majority gap is monotone in the pair separation") {
  Rng rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    const int nw = 3 + static_cast<int>(rng.below(3));
    const FiniteWorld w = random_world(rng, 3, nw);
    const DiscreteDist p_d = random_dist(rng, nw);
    const DiscreteDist q = random_dist(rng, nw);
    double last = -1.0;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      // p_o(t) walks away from p_d, so tv(p_d, p_o) grows in t
      std::vector<double> po(nw);
      for (int i = 0; i < nw; ++i) po[i] = (1.0 - t) * p_d.prob(i) + t * q.prob(i);
      const ProtectionPair pair{DiscreteDist::from_probs(po), p_d};
      const MajorityGapResult g = majority_gap(w, pair);
      CHECK(g.delta >= last - 1e-12);
      last = g.delta;
    }
  }
}

TEST_CASE("verify_tradeoff with identical pairs reduces to the leakage mean") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const int nw = 2 + static_cast<int>(rng.below(3));
    std::vector<FiniteWorld> worlds;
    std::vector<ProtectionPair> pairs;
    for (int k = 0; k < 2; ++k) {
      worlds.push_back(random_world(rng, 3, nw));
      const DiscreteDist p = random_dist(rng, nw);
      pairs.push_back({p, p});
    }
    const ProtectionPair agg{pairs[0].p_o, pairs[0].p_d};
    for (TradeoffKind kind : {TradeoffKind::kJsAlpha, TradeoffKind::kTv}) {
      const TradeoffReport r = verify_tradeoff(kind, worlds, pairs, agg, 0.5);
      CHECK(r.holds);
      CHECK(r.lhs == doctest::Approx(r.eps_p_mean).epsilon(1e-12));
      CHECK(r.bound_term == doctest::Approx(0.0));
      CHECK(r.slack == doctest::Approx(r.bound_term).epsilon(1e-12));
      CHECK_FALSE(r.gamma_defined);  // aggregated pair has zero separation
    }
  }
}

TEST_CASE("verify_tradeoff trivial single client") {
  // kernel rows equal to the prior: no belief shift at all
  const FiniteWorld w = make_world({0.4, 0.6}, {{0.4, 0.6}, {0.4, 0.6}},
                                   {{1.0, 1.0}, {0.0, 0.0}});
  const ProtectionPair pair{DiscreteDist::uniform(2), DiscreteDist::point_mass(0, 2)};
  for (TradeoffKind kind : {TradeoffKind::kJsAlpha, TradeoffKind::kTv}) {
    const TradeoffReport r = verify_tradeoff(kind, {w}, {pair}, pair, 0.5);
    CHECK(r.lhs == doctest::Approx(0.0));
    CHECK(r.holds);
  }
}

TEST_CASE("tradeoff first forms hold on a random corpus") {
  for (int seed = 0; seed < 100; ++seed) {
    const VerificationUnit unit = random_unit(9000 + seed, 2, 4, 5);
    for (double alpha : {0.1, 0.5, 0.9}) {
      const TradeoffReport r1 = verify_tradeoff(TradeoffKind::kJsAlpha, unit.worlds,
                                                unit.pairs, unit.aggregated, alpha);
      CHECK(r1.holds);
    }
    const TradeoffReport r2 = verify_tradeoff(TradeoffKind::kTv, unit.worlds, unit.pairs,
                                              unit.aggregated, 0.5);
    CHECK(r2.holds);
  }
}

TEST_CASE("bound lemma checks on trivial worlds") {
  const FiniteWorld flat = make_world({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}},
                                      const_utility(2, 2, 0.0));
  const ProtectionPair pair{DiscreteDist::point_mass(0, 2), DiscreteDist::point_mass(1, 2)};
  for (BoundLemma lemma : {BoundLemma::kGjsd, BoundLemma::kDtv}) {
    // rows equal to the prior: delta = 0 and both sides vanish
    const LemmaCheckResult r = bound_lemma_check(lemma, flat, pair, 0.5);
    CHECK(r.lhs == doctest::Approx(0.0));
    CHECK(r.rhs == doctest::Approx(0.0));
    CHECK(r.holds);
  }

  const FiniteWorld w = make_world({0.5, 0.5}, {{0.8, 0.2}, {0.3, 0.7}},
                                   const_utility(2, 2, 0.0));
  const DiscreteDist p = DiscreteDist::from_probs({0.6, 0.4});
  const ProtectionPair same{p, p};
  for (BoundLemma lemma : {BoundLemma::kGjsd, BoundLemma::kDtv}) {
    const LemmaCheckResult r = bound_lemma_check(lemma, w, same, 0.3);
    CHECK(r.lhs == doctest::Approx(0.0));
    CHECK(r.holds);
  }
}

TEST_CASE("bound lemmas on a random corpus") {
  int dtv_violations = 0;
  for (int seed = 0; seed < 200; ++seed) {
    const VerificationUnit unit = random_unit(7000 + seed, 2, 4, 5);
    for (std::size_t k = 0; k < unit.worlds.size(); ++k) {
      for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const LemmaCheckResult g =
            bound_lemma_check(BoundLemma::kGjsd, unit.worlds[k], unit.pairs[k], alpha);
        CHECK(g.holds);
      }
      const LemmaCheckResult d =
          bound_lemma_check(BoundLemma::kDtv, unit.worlds[k], unit.pairs[k], 0.5);
      if (!d.holds) ++dtv_violations;
      // the support-scaled variant is the provable one
      CHECK(d.holds_support_scaled);
    }
  }
  // the literal pointwise-constant bound can fail on a small fraction of
  // worlds with |D| >= 3; the scaled variant above must never fail
  CHECK(dtv_violations <= 5);
}

TEST_CASE("pointwise-constant bound counterexample") {
  // Four data atoms, two kernel rows mirrored around the prior, disjoint
  // point-mass pair. tv(F_A, F*) = 0.4 but 2*delta*tv(p_o,p_d) = 0.2: the
  // literal bound fails while the support-scaled bound (|D| delta tv = 0.4)
  // holds with equality.
  const FiniteWorld w = make_world(
      {0.25, 0.25, 0.25, 0.25},
      {{0.35, 0.35, 0.15, 0.15}, {0.15, 0.15, 0.35, 0.35}},
      const_utility(2, 4, 0.0));
  const ProtectionPair pair{DiscreteDist::point_mass(1, 2), DiscreteDist::point_mass(0, 2)};
  const LemmaCheckResult r = bound_lemma_check(BoundLemma::kDtv, w, pair, 0.5);
  CHECK(r.lhs == doctest::Approx(0.4));
  CHECK(r.rhs == doctest::Approx(0.2));
  CHECK_FALSE(r.holds);
  CHECK(r.rhs_support_scaled == doctest::Approx(0.4));
  CHECK(r.holds_support_scaled);
}

TEST_CASE("utility lower bound") {
  // p_o = p_d everywhere: both sides zero
  const FiniteWorld w = make_world({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}},
                                   {{0.9, 0.9}, {0.1, 0.1}});
  const ProtectionPair same{DiscreteDist::uniform(2), DiscreteDist::uniform(2)};
  const UtilityBoundResult r0 = utility_lower_bound_check({w}, {same}, same);
  CHECK(r0.eps_u == doctest::Approx(0.0));
  CHECK(r0.lower_bound == doctest::Approx(0.0));
  CHECK(r0.holds);

  // single parameter atom: aggregated TV is 0, the bound degenerates to 0
  const FiniteWorld w1 = make_world({0.5, 0.5}, {{0.5, 0.5}}, {{0.7, 0.7}});
  const ProtectionPair p1{DiscreteDist::point_mass(0, 1), DiscreteDist::point_mass(0, 1)};
  const UtilityBoundResult r1 = utility_lower_bound_check({w1}, {p1}, p1);
  CHECK(r1.lower_bound == doctest::Approx(0.0));
  CHECK(r1.holds);

  // premise-satisfying random corpus
  for (int seed = 0; seed < 100; ++seed) {
    const VerificationUnit unit = premise_unit(5000 + seed, 2, 4, 5);
    const UtilityBoundResult r =
        utility_lower_bound_check(unit.worlds, unit.pairs, unit.aggregated);
    CHECK_FALSE(r.assumption_violated);
    CHECK(r.holds);
  }
}
