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
#include <functional>
#include <optional>
#include <vector>

#include "pufl/numerics.hpp"

namespace pufl {

enum class TaskKind { kRegression, kBinary };

// Synthetic data description. Regression draws features uniformly in [0,1]^d
// and labels y = beta.x + 0.5 + 0.05 N(0,1) with ||beta|| = separation.
// Binary places two Gaussian blobs 'separation' apart along a seeded
// direction. Features are clamped to [0,1]^d in both cases.
struct DataSpec {
  int n_clients = 1;
  int samples_per_client = 2;
  int input_dim = 1;
  TaskKind task = TaskKind::kRegression;
  double separation = 0.5;

  void validate() const;
};

struct ClientState {
  int id = 0;
  Dataset dataset;                    // clean
  std::optional<Dataset> distorted;   // same shape as dataset when present
  Vector local_params;
};

struct FederationState {
  Vector global_params;
  std::vector<ClientState> clients;
  int round_index = 0;
  std::uint64_t rng_seed = 0;
};

struct TrainConfig {
  int epochs = 1;
  double lr = 0.1;
};

// Per-client datasets, byte-identical for equal (spec, seed).
std::vector<Dataset> generate_synthetic(const DataSpec& spec, std::uint64_t seed);

// Local full-batch gradient descent from the global parameters; returns the
// update theta_k - theta. Trains on the distorted dataset when present.
Vector local_train(const ClientState& client, const Model& global_model,
                   int epochs, double lr);

// theta + (1/K) sum of updates; uniform weights.
Vector aggregate(const Vector& params, const std::vector<Vector>& updates);

// Hook applied to each client's clean data before local training. Receives
// the current global model, the client index and the clean dataset; returns
// the dataset to train on. Must be deterministic in its arguments.
using DistortionHook =
    std::function<Dataset(const Model& global_model, int client_index, const Dataset& clean)>;

DistortionHook identity_hook();

// One synchronous round: refresh each client's distorted data through the
// hook, train locally, aggregate, bump the round counter. Client order never
// affects the result.
FederationState run_round(const FederationState& state, const Model& model_template,
                          const TrainConfig& train, const DistortionHook& hook);

struct RoundRecord {
  int round_index = 0;             // index of the completed round, starting at 0
  Vector global_params_before;     // parameters the round started from
  Vector global_params_after;
  std::vector<Vector> client_updates;
  std::vector<Dataset> distorted;  // per-client data used for the round
  double clean_loss_after = 0.0;   // global model loss on clean data
};

struct FederationConfig {
  DataSpec data;
  ModelKind model_kind = ModelKind::kLinear;
  int hidden_width = 0;
  int rounds = 1;
  TrainConfig train;
  std::uint64_t seed = 0;
};

// Full trajectory. The per-round observer, when given, sees each record as it
// is produced (used by the experiment pipeline to attack round updates).
std::vector<RoundRecord> run_federation(
    const FederationConfig& config, const DistortionHook& hook,
    const std::function<void(const RoundRecord&)>& observer = nullptr);

}  // namespace pufl
