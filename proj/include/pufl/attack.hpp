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
#include <utility>
#include <vector>

#include "pufl/numerics.hpp"

namespace pufl {

// One gradient-inversion run: the candidate dataset at every iteration, the
// gradient mismatch ||g(d_i) - theta_obs|| and, once the true data is known,
// the mean per-sample distance to it.
struct AttackTrace {
  std::vector<Matrix> iterates;   // candidate feature matrices d_i
  std::vector<double> mismatch;   // ||g(d_i) - theta_obs||
  Vector labels;                  // labels assumed known to the adversary
  bool diverged = false;          // objective went non-finite; trace is partial

  std::size_t length() const { return iterates.size(); }
};

// Empirical envelope constants fitted from attack traces and probe pairs.
struct EmpiricalConstants {
  double c2 = 0.0;   // regret scale: c2 * I^p dominates every observed prefix
  double p = 0.0;    // regret exponent from the log-log prefix regression
  double c_b = 0.0;  // max ||x - x~|| / ||g(x) - g(x~)|| over probes
  double c_a = 0.0;  // min of the same ratio
  double r_squared = 0.0;  // fit quality of the log-log regression
};

// Gradient inversion: descent on d -> ||g(d) - theta_obs||^2 from a seeded
// random start in [0,1]^(n x d), iterates clamped to the box. Labels are
// treated as known. The objective gradient is taken by central differences
// on the objective itself, which keeps one code path for every model kind.
AttackTrace invert(const Model& model_template, const Vector& theta_obs,
                   int n_samples, int input_dim, const Vector& labels,
                   int iters, double lr, std::uint64_t seed);

struct LeakageDetail {
  double raw = 0.0;    // (D - mean distance)/D before clamping
  double value = 0.0;  // clamped to [0,1]
  bool clamped = false;
};

// eps_p = [D - (1/I) sum_i (1/n) sum_m ||d_i^(m) - true^(m)||] / D for I > 0,
// 0 for an empty trace; clamped to [0,1].
LeakageDetail privacy_leakage_detail(const AttackTrace& trace, const Dataset& true_data,
                                     double max_distance);
double privacy_leakage_empirical(const AttackTrace& trace, const Dataset& true_data,
                                 double max_distance);

// Euclidean norm of the difference of the dataset row means.
double distortion_extent(const Dataset& a, const Dataset& b);

// Fits (p, c2) by least squares on ln(cumulative mismatch) vs ln(prefix)
// pooled across traces, then inflates c2 so c2 * I^p dominates every prefix
// of every trace. c_a / c_b come from the probe ratios; probes with equal
// gradients are excluded and it is an error if none remain.
EmpiricalConstants fit_constants(
    const std::vector<AttackTrace>& traces,
    const std::vector<std::pair<Dataset, Dataset>>& probe_pairs,
    const Model& model_template);

struct LeakageBound {
  double bound = 1.0;
  bool gate_satisfied = false;  // distortion >= 2 c2 c_b I^(p-1)
};

// bound = 1 - (distortion + c2 c_b I^(p-1)) / (4 D); applicable when the
// distortion clears the gate.
LeakageBound leakage_upper_bound(double distortion, int iters,
                                 const EmpiricalConstants& consts, double max_distance);

// Distortion radius that caps the leakage at eps:
//   eps1 = max(0, 4 D (1 - c - eps)), c = c2 c_b I^(p-1) / (4 D).
double epsilon1_threshold(double eps, double max_distance,
                          const EmpiricalConstants& consts, int iters);

}  // namespace pufl
