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

#include "pufl/distort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pufl/rng.hpp"

namespace pufl {

std::string to_string(DistortionMode mode) {
  switch (mode) {
    case DistortionMode::kIdentity: return "identity";
    case DistortionMode::kLearnToDistort: return "learn_to_distort";
    case DistortionMode::kAdversarial: return "adversarial";
    case DistortionMode::kUnlearnable: return "unlearnable";
    case DistortionMode::kGaussian: return "gaussian";
    case DistortionMode::kQuantize: return "quantize";
    case DistortionMode::kSparsify: return "sparsify";
    case DistortionMode::kMpcStub: return "mpc_stub";
    case DistortionMode::kHeStub: return "he_stub";
  }
  return "unknown";
}

DistortionMode distortion_mode_from_string(const std::string& name) {
  if (name == "identity") return DistortionMode::kIdentity;
  if (name == "learn_to_distort") return DistortionMode::kLearnToDistort;
  if (name == "adversarial") return DistortionMode::kAdversarial;
  if (name == "unlearnable") return DistortionMode::kUnlearnable;
  if (name == "gaussian") return DistortionMode::kGaussian;
  if (name == "quantize") return DistortionMode::kQuantize;
  if (name == "sparsify") return DistortionMode::kSparsify;
  if (name == "mpc_stub") return DistortionMode::kMpcStub;
  if (name == "he_stub") return DistortionMode::kHeStub;
  throw std::invalid_argument("unknown distortion mode: " + name);
}

void DistortionPlan::validate() const {
  if (eps1 < 0.0) throw std::invalid_argument("distortion eps1 must be >= 0");
  if (eps < 0.0) throw std::invalid_argument("distortion eps must be >= 0");
  if (inner_steps < 1) throw std::invalid_argument("inner_steps must be >= 1");
  if (inner_lr < 0.0) throw std::invalid_argument("inner_lr must be >= 0");
  if (mode == DistortionMode::kGaussian && sigma2_candidates.empty()) {
    throw std::invalid_argument("gaussian mode needs a nonempty sigma2 candidate set");
  }
  for (double s : sigma2_candidates) {
    if (s < 0.0) throw std::invalid_argument("sigma2 candidates must be >= 0");
  }
  if (mode == DistortionMode::kQuantize && quant_levels < 2) {
    throw std::invalid_argument("quantize needs levels >= 2");
  }
  if (mode == DistortionMode::kSparsify &&
      (keep_fraction <= 0.0 || keep_fraction > 1.0)) {
    throw std::invalid_argument("keep_fraction must be in (0,1]");
  }
}

namespace {

DistortedBatch with_delta(const Dataset& batch, Matrix delta) {
  DistortedBatch out;
  out.distorted = Dataset(batch.features + delta, batch.labels);
  out.delta = std::move(delta);
  return out;
}

// Best-feasible-iterate PGD on one sample. `ascent` flips the step and the
// objective preference; `project` enforces the mode's ball constraint.
template <typename Project>
Vector pgd_sample(const Model& model, const Vector& x, double y, int steps, double lr,
                  bool ascent, const Project& project, const Vector& start) {
  Vector delta = project(start);
  double best_val = loss_sample(model, x + delta, y);
  Vector best = delta;
  for (int s = 0; s < steps; ++s) {
    const Vector g = grad_inputs(model, x + delta, y);
    delta = project(ascent ? (delta + lr * g).eval() : (delta - lr * g).eval());
    const double val = loss_sample(model, x + delta, y);
    if (!std::isfinite(val)) throw std::domain_error("inner_distort: non-finite loss");
    if (ascent ? val > best_val : val < best_val) {
      best_val = val;
      best = delta;
    }
  }
  return best;
}

}  // namespace

DistortedBatch inner_distort(const Model& model, const Dataset& batch,
                             const DistortionPlan& plan) {
  plan.validate();
  model.validate();
  const int n = batch.size();
  const int d = batch.dim();
  Matrix delta = Matrix::Zero(n, d);

  // Zero exterior radius makes the constraint vacuous; skip the loop so the
  // trajectory matches undistorted training exactly.
  if (plan.mode == DistortionMode::kLearnToDistort && plan.eps1 == 0.0) {
    return with_delta(batch, std::move(delta));
  }

  for (int i = 0; i < n; ++i) {
    // Per-sample seed stream keeps results independent of execution order.
    Rng rng(derive_seed(plan.seed, "distort-sample", static_cast<std::uint64_t>(i)));
    const Vector x = batch.features.row(i).transpose();
    const double y = batch.labels(i);
    Vector row;
    switch (plan.mode) {
      case DistortionMode::kLearnToDistort: {
        Vector fallback(d);
        for (int j = 0; j < d; ++j) fallback(j) = rng.normal();
        const double norm = fallback.norm();
        fallback = norm > 0.0 ? (fallback / norm).eval() : Vector::Unit(d, 0);
        const auto project = [&](const Vector& v) {
          return project_outside_ball(v, plan.eps1, fallback);
        };
        row = pgd_sample(model, x, y, plan.inner_steps, plan.inner_lr, false, project,
                         Vector::Zero(d));
        break;
      }
      case DistortionMode::kAdversarial: {
        const auto project = [&](const Vector& v) { return project_inside_ball(v, plan.eps); };
        row = pgd_sample(model, x, y, plan.inner_steps, plan.inner_lr, true, project,
                         Vector::Zero(d));
        break;
      }
      case DistortionMode::kUnlearnable: {
        const auto project = [&](const Vector& v) { return project_inside_ball(v, plan.eps); };
        row = pgd_sample(model, x, y, plan.inner_steps, plan.inner_lr, false, project,
                         Vector::Zero(d));
        break;
      }
      default:
        throw std::invalid_argument(
            "inner_distort: plan mode is not an optimization mode: " + to_string(plan.mode));
    }
    delta.row(i) = row.transpose();
  }
  return with_delta(batch, std::move(delta));
}

DistortedBatch gaussian_mechanism(const Dataset& batch, double sigma2, std::uint64_t seed) {
  if (sigma2 < 0.0) throw std::invalid_argument("gaussian_mechanism: sigma2 must be >= 0");
  const int n = batch.size();
  const int d = batch.dim();
  Matrix delta = Matrix::Zero(n, d);
  if (sigma2 > 0.0) {
    const double sigma = std::sqrt(sigma2);
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(seed, "gaussian-sample", static_cast<std::uint64_t>(i)));
      for (int j = 0; j < d; ++j) delta(i, j) = sigma * rng.normal();
    }
  }
  return with_delta(batch, std::move(delta));
}

double choose_sigma(const Model& model, const Dataset& batch,
                    const std::vector<double>& candidates, std::uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("choose_sigma: empty candidate set");
  constexpr int kDraws = 64;
  double best_sigma2 = candidates.front();
  double best_loss = std::numeric_limits<double>::infinity();
  for (double sigma2 : candidates) {
    double total = 0.0;
    for (int rep = 0; rep < kDraws; ++rep) {
      const DistortedBatch b = gaussian_mechanism(
          batch, sigma2, derive_seed(seed, "choose-sigma", static_cast<std::uint64_t>(rep)));
      total += loss_mean(model, b.distorted);
    }
    const double mean_loss = total / kDraws;
    if (mean_loss < best_loss - 1e-12 ||
        (std::abs(mean_loss - best_loss) <= 1e-12 && sigma2 < best_sigma2)) {
      best_loss = mean_loss;
      best_sigma2 = sigma2;
    }
  }
  return best_sigma2;
}

DistortedBatch quantize(const Dataset& batch, int levels) {
  if (levels < 2) throw std::invalid_argument("quantize: levels must be >= 2");
  const double step = 1.0 / static_cast<double>(levels - 1);
  Matrix delta(batch.size(), batch.dim());
  for (int i = 0; i < batch.size(); ++i) {
    for (int j = 0; j < batch.dim(); ++j) {
      const double v = batch.features(i, j);
      const double q = std::round(v / step) * step;
      delta(i, j) = q - v;
    }
  }
  return with_delta(batch, std::move(delta));
}

DistortedBatch sparsify(const Dataset& batch, double keep_fraction) {
  if (keep_fraction <= 0.0 || keep_fraction > 1.0) {
    throw std::invalid_argument("sparsify: keep_fraction must be in (0,1]");
  }
  const int d = batch.dim();
  const int keep = static_cast<int>(std::ceil(keep_fraction * d));
  Matrix delta = Matrix::Zero(batch.size(), d);
  std::vector<int> order(d);
  for (int i = 0; i < batch.size(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    // Stable magnitude ordering: ties keep the lower coordinate index.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(batch.features(i, a)) > std::abs(batch.features(i, b));
    });
    for (int r = keep; r < d; ++r) delta(i, order[r]) = -batch.features(i, order[r]);
  }
  return with_delta(batch, std::move(delta));
}

double utility_loss_empirical(const Model& model, const Dataset& clean,
                              const Dataset& distorted) {
  if (clean.features.rows() != distorted.features.rows() ||
      clean.features.cols() != distorted.features.cols()) {
    throw std::invalid_argument("utility_loss_empirical: shape mismatch");
  }
  return loss_mean(model, distorted) - loss_mean(model, clean);
}

DistortionHook make_distortion_hook(const DistortionPlan& plan) {
  plan.validate();
  if (plan.mode == DistortionMode::kMpcStub || plan.mode == DistortionMode::kHeStub) {
    const std::string name = to_string(plan.mode);
    return [name](const Model&, int, const Dataset&) -> Dataset {
      throw UnimplementedMechanismError("unimplemented mechanism: " + name);
    };
  }
  return [plan](const Model& model, int client_index, const Dataset& clean) -> Dataset {
    DistortionPlan local = plan;
    // Fold the client id into the seed stream; the round enters through the
    // model parameters being different each round, and refreshing against the
    // current model is exactly the alternating scheme.
    local.seed = derive_seed(plan.seed, "distort-client", static_cast<std::uint64_t>(client_index));
    switch (plan.mode) {
      case DistortionMode::kIdentity:
        return clean;
      case DistortionMode::kLearnToDistort:
      case DistortionMode::kAdversarial:
      case DistortionMode::kUnlearnable:
        return inner_distort(model, clean, local).distorted;
      case DistortionMode::kGaussian: {
        const double sigma2 =
            choose_sigma(model, clean, plan.sigma2_candidates, local.seed);
        return gaussian_mechanism(clean, sigma2, local.seed).distorted;
      }
      case DistortionMode::kQuantize:
        return quantize(clean, plan.quant_levels).distorted;
      case DistortionMode::kSparsify:
        return sparsify(clean, plan.keep_fraction).distorted;
      default:
        throw UnimplementedMechanismError("unimplemented mechanism: " + to_string(plan.mode));
    }
  };
}

LearnToDistortResult train_learn_to_distort(const FederationConfig& config,
                                            const DistortionPlan& plan) {
  if (plan.mode != DistortionMode::kLearnToDistort &&
      plan.mode != DistortionMode::kIdentity) {
    throw std::invalid_argument("train_learn_to_distort: plan mode must be learn_to_distort");
  }
  LearnToDistortResult result;
  const DistortionHook hook = make_distortion_hook(plan);
  result.history = run_federation(config, hook);
  // Effective per-round deltas of the first client against its clean data.
  const std::vector<Dataset> clean = generate_synthetic(config.data, config.seed);
  for (const RoundRecord& record : result.history) {
    result.delta_history.push_back(record.distorted[0].features - clean[0].features);
  }
  result.final_model = Model::make(config.model_kind, config.data.input_dim, config.hidden_width);
  result.final_model.params = result.history.back().global_params_after;
  result.final_clean_loss = result.history.back().clean_loss_after;
  return result;
}

}  // namespace pufl
