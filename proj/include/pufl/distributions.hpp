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

#include <string>
#include <vector>

namespace pufl {

// Finite discrete probability distribution over named atoms. Atom order is
// significant: binary operations require identical support order and never
// re-index, so atom misalignment fails loudly instead of silently.
class DiscreteDist {
 public:
  DiscreteDist() = default;

  // Weights must be nonnegative and sum to 1 within 1e-9; a deviation within
  // that tolerance is renormalized, anything larger is rejected.
  DiscreteDist(std::vector<std::string> support, std::vector<double> probs);

  // Convenience constructor with atoms named "0", "1", ...
  static DiscreteDist from_probs(std::vector<double> probs);
  static DiscreteDist point_mass(std::size_t index, std::size_t size);
  static DiscreteDist uniform(std::size_t size);

  std::size_t size() const { return probs_.size(); }
  double prob(std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<std::string>& support() const { return support_; }

  bool same_support(const DiscreteDist& other) const;

 private:
  std::vector<std::string> support_;
  std::vector<double> probs_;
};

// KL divergence in nats with the 0 log 0 = 0 convention. Returns +infinity
// when some p > 0 has q = 0.
double kl(const DiscreteDist& p, const DiscreteDist& q);

// Total variation distance, defined as half the L1 distance. Equal to the
// positive-part mass sum_{p>q} (p - q).
double tv(const DiscreteDist& p, const DiscreteDist& q);

// Pointwise convex combination alpha*p + (1-alpha)*q.
DiscreteDist mixture(const DiscreteDist& p, const DiscreteDist& q, double alpha);

// Skew Jensen-Shannon divergence:
//   JS_a(P||Q) = a KL(P||M) + (1-a) KL(Q||M),  M = a P + (1-a) Q.
// Finite for alpha in (0,1); exactly 0 at alpha in {0,1}.
double js_alpha(const DiscreteDist& p, const DiscreteDist& q, double alpha);

// x^(1/e) with e = Euler's number; the root applied to divergences before
// they enter triangle-inequality arguments.
double root_e(double x);

// max{2a KL(P||M), 2(1-a) KL(Q||M)}; always >= js_alpha(p, q, alpha).
double js_alpha_kl_bound(const DiscreteDist& p, const DiscreteDist& q, double alpha);

}  // namespace pufl
