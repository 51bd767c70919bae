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

#include "pufl/distributions.hpp"
#include "pufl/rng.hpp"
#include "pufl/worldgen.hpp"

using namespace pufl;

TEST_CASE("DiscreteDist construction rules") {
  CHECK_NOTHROW(DiscreteDist::from_probs({0.5, 0.5}));
  // within-tolerance deviation is renormalized
  const DiscreteDist d = DiscreteDist::from_probs({0.5, 0.5 + 5e-10});
  CHECK(d.prob(0) + d.prob(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(DiscreteDist::from_probs({0.6, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDist::from_probs({1.2, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDist({"a", "a"}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("kl") {
  const DiscreteDist p = DiscreteDist::from_probs({1.0, 0.0});
  const DiscreteDist q = DiscreteDist::from_probs({0.5, 0.5});
  CHECK(kl(p, p) == doctest::Approx(0.0));
  CHECK(kl(p, q) == doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(kl(q, p)));

  const DiscreteDist other({"x", "y"}, {0.5, 0.5});
  CHECK_THROWS_AS(kl(p, other), std::invalid_argument);
}

TEST_CASE("tv") {
  const DiscreteDist p = DiscreteDist::from_probs({0.7, 0.3});
  const DiscreteDist q = DiscreteDist::from_probs({0.4, 0.6});
  CHECK(tv(p, p) == doctest::Approx(0.0));
  CHECK(tv(p, q) == doctest::Approx(0.3));
  CHECK(tv(DiscreteDist::point_mass(0, 2), DiscreteDist::point_mass(1, 2)) ==
        doctest::Approx(1.0));
}

TEST_CASE("tv is a metric") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const DiscreteDist p = random_dist(rng, n);
    const DiscreteDist q = random_dist(rng, n);
    const DiscreteDist r = random_dist(rng, n);
    CHECK(tv(p, q) == doctest::Approx(tv(q, p)));
    CHECK(tv(p, q) >= 0.0);
    CHECK(tv(p, q) <= 1.0 + 1e-12);
    CHECK(tv(p, r) <= tv(p, q) + tv(q, r) + 1e-12);
    CHECK(tv(p, p) <= 1e-12);
  }
}

TEST_CASE("mixture") {
  const DiscreteDist p = DiscreteDist::point_mass(0, 2);
  const DiscreteDist q = DiscreteDist::point_mass(1, 2);
  CHECK(tv(mixture(p, q, 0.0), q) == doctest::Approx(0.0));
  CHECK(tv(mixture(p, q, 1.0), p) == doctest::Approx(0.0));
  const DiscreteDist m = mixture(p, q, 0.5);
  CHECK(m.prob(0) == doctest::Approx(0.5));
  CHECK(m.prob(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(mixture(p, q, 1.5), std::invalid_argument);
}

TEST_CASE("js_alpha") {
  const DiscreteDist p = DiscreteDist::point_mass(0, 2);
  const DiscreteDist q = DiscreteDist::point_mass(1, 2);
  CHECK(js_alpha(p, q, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(js_alpha(p, q, 0.0) == doctest::Approx(0.0));
  CHECK(js_alpha(p, q, 1.0) == doctest::Approx(0.0));
  CHECK(js_alpha(p, p, 0.3) == doctest::Approx(0.0));

  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const double a = rng.uniform(0.01, 0.99);
    const double v = js_alpha(random_dist(rng, n), random_dist(rng, n), a);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("root_e") {
  CHECK(root_e(0.0) == doctest::Approx(0.0));
  CHECK(root_e(1.0) == doctest::Approx(1.0));
  const double r = root_e(std::log(2.0));
  CHECK(r == doctest::Approx(0.8739).epsilon(1e-4));
  // inverse check: raising the result to the e-th power recovers the input
  CHECK(std::pow(r, std::exp(1.0)) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(root_e(-1e-9), std::invalid_argument);
}

TEST_CASE("js_alpha_kl_bound dominates js_alpha") {
  const DiscreteDist p = DiscreteDist::point_mass(0, 2);
  const DiscreteDist q = DiscreteDist::point_mass(1, 2);
  CHECK(js_alpha_kl_bound(p, p, 0.4) == doctest::Approx(0.0));
  CHECK(js_alpha_kl_bound(p, q, 0.5) == doctest::Approx(std::log(2.0)));

  Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const DiscreteDist a = random_dist(rng, n);
    const DiscreteDist b = random_dist(rng, n);
    const double alpha = rng.uniform(0.0, 1.0);
    CHECK(js_alpha(a, b, alpha) <= js_alpha_kl_bound(a, b, alpha) + 1e-12);
  }
}

TEST_CASE("triangle inequality for the e-th root of skew JS") {
  Rng rng(31);
  const double alphas[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const DiscreteDist p = random_dist(rng, n);
    const DiscreteDist q = random_dist(rng, n);
    const DiscreteDist r = random_dist(rng, n);
    const double a = alphas[trial % 9];
    const double lhs = root_e(js_alpha(p, r, a));
    const double rhs = root_e(js_alpha(p, q, a)) + root_e(js_alpha(q, r, a));
    CHECK(lhs <= rhs + 1e-9);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("square-root JS triangle inequality at alpha = 1/2") {
  Rng rng(37);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const DiscreteDist p = random_dist(rng, n);
    const DiscreteDist q = random_dist(rng, n);
    const DiscreteDist r = random_dist(rng, n);
    const double lhs = std::sqrt(js_alpha(p, r, 0.5));
    CHECK(lhs <= std::sqrt(js_alpha(p, q, 0.5)) + std::sqrt(js_alpha(q, r, 0.5)) + 1e-9);
  }
}

TEST_CASE("mixture ratio ordering at alpha = 1/2") {
  // pointwise f_p / f_m <= f_m / f_q wherever f_q > 0
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const DiscreteDist p = random_dist(rng, n, 1e-3);
    const DiscreteDist q = random_dist(rng, n, 1e-3);
    const DiscreteDist m = mixture(p, q, 0.5);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(p.prob(i) / m.prob(i) <= m.prob(i) / q.prob(i) + 1e-9);
    }
  }
}

TEST_CASE("log ratio bounded by relative difference") {
  // |ln(a/b)| <= |a-b| / min(a,b) for positive pairs
  Rng rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = rng.uniform(1e-3, 10.0);
    const double b = rng.uniform(1e-3, 10.0);
    CHECK(std::abs(std::log(a / b)) <= std::abs(a - b) / std::min(a, b) + 1e-9);
  }
}
