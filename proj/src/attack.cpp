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

#include "pufl/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "pufl/rng.hpp"

namespace pufl {

namespace {

double mismatch_norm(const Model& model, const Matrix& candidate, const Vector& labels,
                     const Vector& theta_obs) {
  Model m = model;
  const Dataset data(candidate, labels);
  return (grad_params(m, data) - theta_obs).norm();
}

double objective(const Model& model, const Matrix& candidate, const Vector& labels,
                 const Vector& theta_obs) {
  const double n = mismatch_norm(model, candidate, labels, theta_obs);
  return n * n;
}

double mean_row_distance(const Matrix& a, const Matrix& b) {
  double sum = 0.0;
  for (int i = 0; i < a.rows(); ++i) sum += (a.row(i) - b.row(i)).norm();
  return sum / static_cast<double>(a.rows());
}

}  // namespace

AttackTrace invert(const Model& model_template, const Vector& theta_obs,
                   int n_samples, int input_dim, const Vector& labels,
                   int iters, double lr, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("invert: iters must be >= 1");
  if (labels.size() != n_samples) throw std::invalid_argument("invert: label count mismatch");
  Model model = model_template;
  model.validate();
  if (model.input_dim != input_dim) {
    throw std::invalid_argument("invert: input dimension mismatch");
  }
  if (theta_obs.size() != model.params.size()) {
    throw std::invalid_argument("invert: observed gradient length mismatch");
  }

  Rng rng(derive_seed(seed, "attack-init"));
  Matrix candidate(n_samples, input_dim);
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < input_dim; ++j) candidate(i, j) = rng.uniform();
  }

  AttackTrace trace;
  trace.labels = labels;
  trace.iterates.reserve(iters);
  trace.mismatch.reserve(iters);

  const double h = 1e-6;
  for (int it = 0; it < iters; ++it) {
    const double mism = mismatch_norm(model, candidate, labels, theta_obs);
    if (!std::isfinite(mism)) {
      trace.diverged = true;
      return trace;
    }
    trace.iterates.push_back(candidate);
    trace.mismatch.push_back(mism);

    // Central-difference gradient of the scalar objective in the candidate
    // entries, then a clamped descent step.
    Matrix grad(n_samples, input_dim);
    for (int i = 0; i < n_samples; ++i) {
      for (int j = 0; j < input_dim; ++j) {
        const double x0 = candidate(i, j);
        candidate(i, j) = x0 + h;
        const double fp = objective(model, candidate, labels, theta_obs);
        candidate(i, j) = x0 - h;
        const double fm = objective(model, candidate, labels, theta_obs);
        candidate(i, j) = x0;
        grad(i, j) = (fp - fm) / (2.0 * h);
      }
    }
    candidate = (candidate - lr * grad).cwiseMax(0.0).cwiseMin(1.0);
  }
  return trace;
}

LeakageDetail privacy_leakage_detail(const AttackTrace& trace, const Dataset& true_data,
                                     double max_distance) {
  if (max_distance <= 0.0) {
    throw std::invalid_argument("privacy_leakage: max distance must be > 0");
  }
  LeakageDetail out;
  if (trace.iterates.empty()) return out;  // I = 0 branch
  double mean_dist = 0.0;
  for (const Matrix& it : trace.iterates) {
    if (it.rows() != true_data.features.rows() || it.cols() != true_data.features.cols()) {
      throw std::invalid_argument("privacy_leakage: trace/data shape mismatch");
    }
    mean_dist += mean_row_distance(it, true_data.features);
  }
  mean_dist /= static_cast<double>(trace.iterates.size());
  out.raw = (max_distance - mean_dist) / max_distance;
  out.value = std::clamp(out.raw, 0.0, 1.0);
  out.clamped = out.value != out.raw;
  return out;
}

double privacy_leakage_empirical(const AttackTrace& trace, const Dataset& true_data,
                                 double max_distance) {
  return privacy_leakage_detail(trace, true_data, max_distance).value;
}

double distortion_extent(const Dataset& a, const Dataset& b) {
  if (a.features.rows() != b.features.rows() || a.features.cols() != b.features.cols()) {
    throw std::invalid_argument("distortion_extent: shape mismatch");
  }
  const Vector mean_a = a.features.colwise().mean();
  const Vector mean_b = b.features.colwise().mean();
  return (mean_a - mean_b).norm();
}

EmpiricalConstants fit_constants(
    const std::vector<AttackTrace>& traces,
    const std::vector<std::pair<Dataset, Dataset>>& probe_pairs,
    const Model& model_template) {
  if (traces.size() < 3) throw std::invalid_argument("fit_constants: need >= 3 traces");
  {
    std::set<std::size_t> lengths;
    for (const AttackTrace& t : traces) lengths.insert(t.length());
    if (lengths.size() < 3) {
      throw std::invalid_argument("fit_constants: need >= 3 distinct trace lengths");
    }
  }
  if (probe_pairs.size() < 10) throw std::invalid_argument("fit_constants: need >= 10 probes");

  // Pooled log-log regression of cumulative mismatch against prefix length.
  // Only the upper half of each trace enters the fit: short prefixes carry an
  // additive constant that biases the slope.
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<std::vector<double>> cumulative_per_trace;
  for (const AttackTrace& t : traces) {
    std::vector<double> cum(t.mismatch.size());
    double run = 0.0;
    for (std::size_t i = 0; i < t.mismatch.size(); ++i) {
      run += t.mismatch[i];
      cum[i] = run;
    }
    cumulative_per_trace.push_back(cum);

    const std::size_t len = cum.size();
    const std::size_t lo = std::max<std::size_t>(8, len / 2);
    if (lo >= len) continue;
    const int points = 32;
    std::size_t last = 0;
    for (int q = 0; q < points; ++q) {
      const double f = static_cast<double>(q) / (points - 1);
      const std::size_t idx = static_cast<std::size_t>(
          std::llround(lo * std::pow(static_cast<double>(len) / lo, f)));
      const std::size_t clamped = std::min(idx, len);
      if (clamped <= last || clamped == 0) continue;
      last = clamped;
      const double c = cum[clamped - 1];
      if (c <= 0.0) continue;
      xs.push_back(std::log(static_cast<double>(clamped)));
      ys.push_back(std::log(c));
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("fit_constants: degenerate traces");

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_constants: degenerate regression");
  double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fit = slope * xs[i] + intercept;
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }

  EmpiricalConstants consts;
  consts.p = std::clamp(slope, 1e-3, 1.5);
  consts.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  // Inflate c2 until c2 * I^p dominates every observed prefix.
  double c2 = 0.0;
  for (const std::vector<double>& cum : cumulative_per_trace) {
    for (std::size_t i = 0; i < cum.size(); ++i) {
      c2 = std::max(c2, cum[i] / std::pow(static_cast<double>(i + 1), consts.p));
    }
  }
  consts.c2 = c2;

  Model model = model_template;
  double best_hi = 0.0;
  double best_lo = std::numeric_limits<double>::infinity();
  int usable = 0;
  for (const auto& [a, b] : probe_pairs) {
    const double gdist = (grad_params(model, a) - grad_params(model, b)).norm();
    if (gdist <= 1e-12) continue;  // identical gradients carry no ratio
    double xdist = 0.0;
    for (int i = 0; i < a.features.rows(); ++i) {
      xdist += (a.features.row(i) - b.features.row(i)).norm();
    }
    const double ratio = xdist / gdist;
    best_hi = std::max(best_hi, ratio);
    best_lo = std::min(best_lo, ratio);
    ++usable;
  }
  if (usable == 0) {
    throw std::invalid_argument("fit_constants: all probe pairs had identical gradients");
  }
  consts.c_b = best_hi;
  consts.c_a = best_lo;
  return consts;
}

LeakageBound leakage_upper_bound(double distortion, int iters,
                                 const EmpiricalConstants& consts, double max_distance) {
  if (max_distance <= 0.0) {
    throw std::invalid_argument("leakage_upper_bound: max distance must be > 0");
  }
  if (iters < 1) throw std::invalid_argument("leakage_upper_bound: iters must be >= 1");
  const double regret_term =
      consts.c2 * consts.c_b * std::pow(static_cast<double>(iters), consts.p - 1.0);
  LeakageBound out;
  out.bound = 1.0 - (distortion + regret_term) / (4.0 * max_distance);
  out.gate_satisfied = distortion >= 2.0 * regret_term;
  return out;
}

double epsilon1_threshold(double eps, double max_distance,
                          const EmpiricalConstants& consts, int iters) {
  if (max_distance <= 0.0) {
    throw std::invalid_argument("epsilon1_threshold: max distance must be > 0");
  }
  if (eps < 0.0 || eps > 1.0) {
    throw std::invalid_argument("epsilon1_threshold: eps must be in [0,1]");
  }
  const double c =
      consts.c2 * consts.c_b * std::pow(static_cast<double>(iters), consts.p - 1.0) /
      (4.0 * max_distance);
  return std::max(0.0, 4.0 * max_distance * (1.0 - c - eps));
}

}  // namespace pufl
