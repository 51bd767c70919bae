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

#include "pufl/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace pufl {

namespace {
constexpr double kSumTolerance = 1e-9;

void require_same_support(const DiscreteDist& p, const DiscreteDist& q, const char* op) {
  if (!p.same_support(q)) {
    throw std::invalid_argument(std::string(op) + ": support mismatch");
  }
}
}  // namespace

DiscreteDist::DiscreteDist(std::vector<std::string> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.size() != probs_.size()) {
    throw std::invalid_argument("DiscreteDist: support/probs length mismatch");
  }
  if (support_.empty()) throw std::invalid_argument("DiscreteDist: empty support");
  std::set<std::string> seen(support_.begin(), support_.end());
  if (seen.size() != support_.size()) {
    throw std::invalid_argument("DiscreteDist: duplicate support atoms");
  }
  double sum = 0.0;
  for (double w : probs_) {
    if (!(w >= 0.0)) throw std::invalid_argument("DiscreteDist: negative probability");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("DiscreteDist: probabilities sum to " +
                                std::to_string(sum) + ", not 1");
  }
  for (double& w : probs_) w /= sum;
}

DiscreteDist DiscreteDist::from_probs(std::vector<double> probs) {
  std::vector<std::string> names(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) names[i] = std::to_string(i);
  return DiscreteDist(std::move(names), std::move(probs));
}

DiscreteDist DiscreteDist::point_mass(std::size_t index, std::size_t size) {
  if (index >= size) throw std::invalid_argument("point_mass: index out of range");
  std::vector<double> p(size, 0.0);
  p[index] = 1.0;
  return from_probs(std::move(p));
}

DiscreteDist DiscreteDist::uniform(std::size_t size) {
  if (size == 0) throw std::invalid_argument("uniform: empty support");
  return from_probs(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

bool DiscreteDist::same_support(const DiscreteDist& other) const {
  return support_ == other.support_;
}

double kl(const DiscreteDist& p, const DiscreteDist& q) {
  require_same_support(p, q, "kl");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p.prob(i);
    if (pi == 0.0) continue;
    const double qi = q.prob(i);
    if (qi == 0.0) return std::numeric_limits<double>::infinity();
    sum += pi * std::log(pi / qi);
  }
  return sum;
}

double tv(const DiscreteDist& p, const DiscreteDist& q) {
  require_same_support(p, q, "tv");
  double l1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p.prob(i) - q.prob(i));
  return 0.5 * l1;
}

DiscreteDist mixture(const DiscreteDist& p, const DiscreteDist& q, double alpha) {
  require_same_support(p, q, "mixture");
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("mixture: alpha out of [0,1]");
  }
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = alpha * p.prob(i) + (1.0 - alpha) * q.prob(i);
  }
  return DiscreteDist(p.support(), std::move(m));
}

double js_alpha(const DiscreteDist& p, const DiscreteDist& q, double alpha) {
  require_same_support(p, q, "js_alpha");
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("js_alpha: alpha out of [0,1]");
  }
  // At the endpoints the mixture collapses onto the weighted argument and the
  // weighted KL terms vanish.
  if (alpha == 0.0 || alpha == 1.0) return 0.0;
  const DiscreteDist m = mixture(p, q, alpha);
  return alpha * kl(p, m) + (1.0 - alpha) * kl(q, m);
}

double root_e(double x) {
  if (x < 0.0) throw std::invalid_argument("root_e: negative input");
  if (x == 0.0) return 0.0;
  return std::exp(std::log(x) / std::numbers::e_v<double>);
}

double js_alpha_kl_bound(const DiscreteDist& p, const DiscreteDist& q, double alpha) {
  require_same_support(p, q, "js_alpha_kl_bound");
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("js_alpha_kl_bound: alpha out of [0,1]");
  }
  if (alpha == 0.0 || alpha == 1.0) return 0.0;
  const DiscreteDist m = mixture(p, q, alpha);
  return std::max(2.0 * alpha * kl(p, m), 2.0 * (1.0 - alpha) * kl(q, m));
}

}  // namespace pufl
