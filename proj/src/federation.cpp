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

#include "pufl/federation.hpp"

#include <stdexcept>

#include "pufl/rng.hpp"

namespace pufl {

void DataSpec::validate() const {
  if (n_clients < 1 || n_clients > 64) {
    throw std::invalid_argument("n_clients must be in [1,64]");
  }
  if (samples_per_client < 1 || samples_per_client > 4096) {
    throw std::invalid_argument("samples_per_client must be in [1,4096]");
  }
  if (input_dim < 1 || input_dim > 64) {
    throw std::invalid_argument("input_dim must be in [1,64]");
  }
  if (separation < 0.0) throw std::invalid_argument("separation must be >= 0");
}

std::vector<Dataset> generate_synthetic(const DataSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int d = spec.input_dim;

  // Task-level structure is shared across clients so the federation learns
  // one underlying function; sample noise is per-client.
  Rng task_rng(derive_seed(seed, "datagen-task"));
  Vector direction(d);
  for (int j = 0; j < d; ++j) direction(j) = task_rng.normal();
  const double norm = direction.norm();
  if (norm > 0.0) direction /= norm;

  std::vector<Dataset> out;
  out.reserve(spec.n_clients);
  for (int k = 0; k < spec.n_clients; ++k) {
    Rng rng(derive_seed(seed, "datagen-client", static_cast<std::uint64_t>(k)));
    Matrix x(spec.samples_per_client, d);
    Vector y(spec.samples_per_client);
    if (spec.task == TaskKind::kRegression) {
      const Vector beta = spec.separation * direction;
      for (int i = 0; i < spec.samples_per_client; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.uniform();
        y(i) = beta.dot(x.row(i)) + 0.5 + 0.05 * rng.normal();
      }
    } else {
      // Two blobs centered at 0.5 +/- (separation/2) along the direction.
      for (int i = 0; i < spec.samples_per_client; ++i) {
        const double label = (i % 2 == 0) ? 0.0 : 1.0;
        const double sign = label > 0.5 ? 1.0 : -1.0;
        for (int j = 0; j < d; ++j) {
          x(i, j) = 0.5 + sign * 0.5 * spec.separation * direction(j) + 0.15 * rng.normal();
        }
        y(i) = label;
      }
    }
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

Vector local_train(const ClientState& client, const Model& global_model,
                   int epochs, double lr) {
  if (epochs < 1) throw std::invalid_argument("local_train: epochs must be >= 1");
  const Dataset& data = client.distorted ? *client.distorted : client.dataset;
  Model local = global_model;
  for (int e = 0; e < epochs; ++e) {
    if (lr == 0.0) break;
    local.params = gd_step(local.params, grad_params(local, data), lr);
  }
  return local.params - global_model.params;
}

Vector aggregate(const Vector& params, const std::vector<Vector>& updates) {
  if (updates.empty()) throw std::invalid_argument("aggregate: empty update list");
  Vector sum = Vector::Zero(params.size());
  for (const Vector& u : updates) {
    if (u.size() != params.size()) {
      throw std::invalid_argument("aggregate: update length mismatch");
    }
    sum += u;
  }
  return params + sum / static_cast<double>(updates.size());
}

DistortionHook identity_hook() {
  return [](const Model&, int, const Dataset& clean) { return clean; };
}

FederationState run_round(const FederationState& state, const Model& model_template,
                          const TrainConfig& train, const DistortionHook& hook) {
  FederationState next = state;
  Model global = model_template;
  global.params = state.global_params;
  global.validate();

  std::vector<Vector> updates;
  updates.reserve(state.clients.size());
  for (std::size_t k = 0; k < next.clients.size(); ++k) {
    ClientState& client = next.clients[k];
    client.distorted = hook(global, client.id, client.dataset);
    if (client.distorted->size() != client.dataset.size() ||
        client.distorted->dim() != client.dataset.dim()) {
      throw std::invalid_argument("run_round: distorted data shape mismatch");
    }
    const Vector update = local_train(client, global, train.epochs, train.lr);
    client.local_params = state.global_params + update;
    updates.push_back(update);
  }
  next.global_params = aggregate(state.global_params, updates);
  next.round_index = state.round_index + 1;
  return next;
}

std::vector<RoundRecord> run_federation(
    const FederationConfig& config, const DistortionHook& hook,
    const std::function<void(const RoundRecord&)>& observer) {
  if (config.rounds < 1) throw std::invalid_argument("run_federation: rounds must be >= 1");
  config.data.validate();

  Model model = Model::make(config.model_kind, config.data.input_dim, config.hidden_width);

  FederationState state;
  state.global_params = model.params;
  state.rng_seed = config.seed;
  std::vector<Dataset> datasets = generate_synthetic(config.data, config.seed);
  for (int k = 0; k < config.data.n_clients; ++k) {
    state.clients.push_back({k, datasets[k], std::nullopt, model.params});
  }

  std::vector<RoundRecord> history;
  history.reserve(config.rounds);
  for (int r = 0; r < config.rounds; ++r) {
    RoundRecord record;
    record.round_index = r;
    record.global_params_before = state.global_params;

    FederationState after = run_round(state, model, config.train, hook);
    for (const ClientState& c : after.clients) {
      record.client_updates.push_back(c.local_params - state.global_params);
      record.distorted.push_back(*c.distorted);
    }
    record.global_params_after = after.global_params;

    Model trained = model;
    trained.params = after.global_params;
    double loss = 0.0;
    for (const ClientState& c : after.clients) loss += loss_mean(trained, c.dataset);
    record.clean_loss_after = loss / static_cast<double>(after.clients.size());

    if (observer) observer(record);
    history.push_back(std::move(record));
    state = std::move(after);
  }
  return history;
}

}  // namespace pufl
