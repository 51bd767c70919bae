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

#include <cstdint>

#include "pufl/bayes.hpp"
#include "pufl/rng.hpp"

namespace pufl {

// Random strictly positive finite world: prior and kernel rows are floored
// uniform draws (keeps log-ratio leakage finite), utilities uniform in [0,1].
FiniteWorld random_world(Rng& rng, int n_data, int n_params);

DiscreteDist random_dist(Rng& rng, std::size_t size, double floor = 0.0);

ProtectionPair random_pair(Rng& rng, int n_params);

// One verification unit: K clients with independent worlds over a shared
// parameter atom count, plus the aggregated pair (uniform client mixture).
struct VerificationUnit {
  std::vector<FiniteWorld> worlds;
  std::vector<ProtectionPair> pairs;
  ProtectionPair aggregated;
};

VerificationUnit random_unit(std::uint64_t seed, int n_clients, int max_data_atoms,
                             int max_param_atoms);

// Unit constructed to satisfy the utility-bound premises: each client's p_o
// is uniform on its argmax utility atoms, draws are rejected until every
// majority gap is positive and the aggregated TV is dominated by each
// per-client TV.
VerificationUnit premise_unit(std::uint64_t seed, int n_clients, int max_data_atoms,
                              int max_param_atoms);

}  // namespace pufl
