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
#include <stdexcept>
#include <vector>

#include "pufl/federation.hpp"
#include "pufl/numerics.hpp"

namespace pufl {

enum class DistortionMode {
  kIdentity,
  kLearnToDistort,  // per-sample loss descent constrained outside the eps1 ball
  kAdversarial,     // per-sample loss ascent constrained inside the eps ball
  kUnlearnable,     // per-sample loss descent constrained inside the eps ball
  kGaussian,
  kQuantize,
  kSparsify,
  kMpcStub,
  kHeStub,
};

std::string to_string(DistortionMode mode);
DistortionMode distortion_mode_from_string(const std::string& name);

// Named mechanism kinds with no executable semantics reject execution with
// this error.
class UnimplementedMechanismError : public std::runtime_error {
 public:
  explicit UnimplementedMechanismError(const std::string& what)
      : std::runtime_error(what) {}
};

struct DistortionPlan {
  DistortionMode mode = DistortionMode::kIdentity;
  double eps1 = 0.0;                       // exterior radius (learn_to_distort)
  double eps = 0.0;                        // interior radius (adversarial/unlearnable)
  std::vector<double> sigma2_candidates;   // gaussian variance set
  int quant_levels = 2;
  double keep_fraction = 1.0;
  int inner_steps = 20;
  double inner_lr = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-sample distortions and the resulting dataset. delta rows are the
// pre-clamp distortions the ball constraints apply to; `distorted` holds
// clamp(x + delta, [0,1]).
struct DistortedBatch {
  Matrix delta;
  Dataset distorted;

  // Post-clamp distortion actually applied to the features.
  Matrix effective_delta(const Dataset& clean) const {
    return distorted.features - clean.features;
  }
};

// Projected-gradient distortion for the three optimization modes. Runs
// inner_steps fixed-size steps per sample and keeps the best feasible iterate
// under the mode's objective (the projected start is always a candidate).
// learn_to_distort with eps1 = 0 short-circuits to zero distortion.
DistortedBatch inner_distort(const Model& model, const Dataset& batch,
                             const DistortionPlan& plan);

// I.i.d. zero-mean Gaussian noise, clamped to [0,1].
DistortedBatch gaussian_mechanism(const Dataset& batch, double sigma2, std::uint64_t seed);

// Argmin over the candidate set of the Monte-Carlo expected loss under the
// mechanism (64 seeded draws per candidate); ties break toward smaller sigma2.
double choose_sigma(const Model& model, const Dataset& batch,
                    const std::vector<double>& candidates, std::uint64_t seed);

// Nearest of L uniform levels spanning [0,1].
DistortedBatch quantize(const Dataset& batch, int levels);

// Keeps the ceil(fraction * d) largest-magnitude coordinates per sample.
DistortedBatch sparsify(const Dataset& batch, double keep_fraction);

// Empirical utility loss: mean loss on distorted minus mean loss on clean
// under the same model; may be negative.
double utility_loss_empirical(const Model& model, const Dataset& clean,
                              const Dataset& distorted);

// Distortion hook for the federation loop (applies the plan each round with
// per-(round, client, sample) derived seeds). Stub mechanisms throw
// UnimplementedMechanismError on application.
DistortionHook make_distortion_hook(const DistortionPlan& plan);

struct LearnToDistortResult {
  Model final_model;
  std::vector<RoundRecord> history;
  std::vector<Matrix> delta_history;  // per round, attacked-client deltas stacked
  double final_clean_loss = 0.0;
};

// Alternating optimization: per-round inner distortion followed by local
// model steps on the distorted data, inside the federation loop.
LearnToDistortResult train_learn_to_distort(const FederationConfig& config,
                                            const DistortionPlan& plan);

}  // namespace pufl
