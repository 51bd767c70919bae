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

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>

namespace pufl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ModelKind { kLinear, kLogistic, kMlp };

std::string to_string(ModelKind kind);

// Small differentiable model with a flat parameter vector.
//  linear:   f(x) = w.x + b,            params = [w(d); b]
//  logistic: f(x) = sigmoid(w.x + b),   params = [w(d); b]
//  mlp:      f(x) = w2.tanh(W1 x + b1) + b2  (raw logit output),
//            params = [W1 row-major (h*d); b1(h); w2(h); b2]
struct Model {
  ModelKind kind = ModelKind::kLinear;
  int input_dim = 0;
  int hidden_width = 0;  // mlp only, 0 otherwise
  Vector params;

  static Model make(ModelKind kind, int input_dim, int hidden_width = 0);
  static int param_count(ModelKind kind, int input_dim, int hidden_width);
  void validate() const;
};

// Feature rows live in [0,1]^d; construction clamps them there.
struct Dataset {
  Matrix features;  // n x d
  Vector labels;    // n

  Dataset() = default;
  Dataset(Matrix x, Vector y);
  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// Model output for one input row. Logistic output lies in (0,1); linear and
// mlp return the raw value.
double predict(const Model& model, const Vector& x);

// Mean per-sample loss: squared error for linear, binary cross entropy for
// logistic and mlp (computed from logits in a numerically stable form).
double loss_mean(const Model& model, const Dataset& data);

double loss_sample(const Model& model, const Vector& x, double y);

// Analytic gradient of loss_mean with respect to the flat parameter vector.
Vector grad_params(const Model& model, const Dataset& data);

// Analytic gradient of the single-sample loss with respect to the input x.
Vector grad_inputs(const Model& model, const Vector& x, double y);

// Central-difference gradient oracle, one evaluation pair per coordinate.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& point, double h);

// params - lr * grad.
Vector gd_step(const Vector& params, const Vector& grad, double lr);

// Euclidean projection onto {v : ||v|| >= eps1}. A zero vector has no
// preferred direction, so the caller supplies one.
Vector project_outside_ball(const Vector& delta, double eps1,
                            const Vector& fallback_direction);

// Euclidean projection onto {v : ||v|| <= eps}.
Vector project_inside_ball(const Vector& delta, double eps);

}  // namespace pufl
