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

#include "pufl/worldgen.hpp"

#include <algorithm>
#include <stdexcept>

namespace pufl {

namespace {
constexpr double kPositivityFloor = 0.05;

std::vector<std::string> atom_names(const char* prefix, int n) {
  std::vector<std::string> names(n);
  for (int i = 0; i < n; ++i) names[i] = std::string(prefix) + std::to_string(i);
  return names;
}

int draw_size(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}
}  // namespace

DiscreteDist random_dist(Rng& rng, std::size_t size, double floor) {
  std::vector<double> p(size);
  double sum = 0.0;
  for (double& v : p) {
    v = rng.uniform() + floor;
    sum += v;
  }
  for (double& v : p) v /= sum;
  return DiscreteDist::from_probs(std::move(p));
}

FiniteWorld random_world(Rng& rng, int n_data, int n_params) {
  FiniteWorld world;
  world.data_atoms = atom_names("d", n_data);
  world.param_atoms = atom_names("w", n_params);
  {
    DiscreteDist prior = random_dist(rng, n_data, kPositivityFloor);
    world.prior = DiscreteDist(world.data_atoms, prior.probs());
  }
  world.kernel.resize(n_params, n_data);
  for (int w = 0; w < n_params; ++w) {
    const DiscreteDist row = random_dist(rng, n_data, kPositivityFloor);
    for (int d = 0; d < n_data; ++d) world.kernel(w, d) = row.prob(d);
  }
  world.utility.resize(n_params, n_data);
  for (int w = 0; w < n_params; ++w) {
    for (int d = 0; d < n_data; ++d) world.utility(w, d) = rng.uniform();
  }
  world.validate();
  return world;
}

ProtectionPair random_pair(Rng& rng, int n_params) {
  return {random_dist(rng, n_params), random_dist(rng, n_params)};
}

namespace {

ProtectionPair aggregate_pairs(const std::vector<ProtectionPair>& pairs) {
  const std::size_t n = pairs.front().p_o.size();
  std::vector<double> po(n, 0.0);
  std::vector<double> pd(n, 0.0);
  for (const ProtectionPair& pair : pairs) {
    for (std::size_t i = 0; i < n; ++i) {
      po[i] += pair.p_o.prob(i);
      pd[i] += pair.p_d.prob(i);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    po[i] /= static_cast<double>(pairs.size());
    pd[i] /= static_cast<double>(pairs.size());
  }
  return {DiscreteDist::from_probs(std::move(po)), DiscreteDist::from_probs(std::move(pd))};
}

}  // namespace

VerificationUnit random_unit(std::uint64_t seed, int n_clients, int max_data_atoms,
                             int max_param_atoms) {
  if (n_clients < 1) throw std::invalid_argument("random_unit: n_clients must be >= 1");
  Rng rng(derive_seed(seed, "world-unit"));
  // One parameter atom count per unit so client pairs can be mixed into the
  // aggregated pair.
  const int nw = draw_size(rng, 2, max_param_atoms);
  VerificationUnit unit;
  for (int k = 0; k < n_clients; ++k) {
    const int nd = draw_size(rng, 2, max_data_atoms);
    unit.worlds.push_back(random_world(rng, nd, nw));
    unit.pairs.push_back(random_pair(rng, nw));
  }
  unit.aggregated = aggregate_pairs(unit.pairs);
  return unit;
}

VerificationUnit premise_unit(std::uint64_t seed, int n_clients, int max_data_atoms,
                              int max_param_atoms) {
  if (n_clients < 1) throw std::invalid_argument("premise_unit: n_clients must be >= 1");
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Rng rng(derive_seed(seed, "premise-unit", attempt));
    const int nw = draw_size(rng, 2, max_param_atoms);
    VerificationUnit unit;
    bool ok = true;
    double min_pair_tv = 1.0;
    for (int k = 0; k < n_clients && ok; ++k) {
      const int nd = draw_size(rng, 2, max_data_atoms);
      FiniteWorld world = random_world(rng, nd, nw);

      // p_o uniform on the argmax utility atoms, p_d unrestricted.
      double best = -1.0;
      for (int w = 0; w < nw; ++w) best = std::max(best, world.row_utility(w));
      std::vector<double> po(nw, 0.0);
      int argmax_count = 0;
      for (int w = 0; w < nw; ++w) {
        if (world.row_utility(w) >= best) {
          po[w] = 1.0;
          ++argmax_count;
        }
      }
      for (double& v : po) v /= argmax_count;
      ProtectionPair pair{DiscreteDist::from_probs(po), random_dist(rng, nw)};

      const MajorityGapResult gap = majority_gap(world, pair);
      if (gap.assumption_violated) {
        ok = false;
        break;
      }
      min_pair_tv = std::min(min_pair_tv, tv(pair.p_o, pair.p_d));
      unit.worlds.push_back(std::move(world));
      unit.pairs.push_back(std::move(pair));
    }
    if (!ok) continue;
    unit.aggregated = aggregate_pairs(unit.pairs);
    if (tv(unit.aggregated.p_o, unit.aggregated.p_d) > min_pair_tv) continue;
    return unit;
  }
  throw std::runtime_error("premise_unit: rejection sampling did not converge");
}

}  // namespace pufl
