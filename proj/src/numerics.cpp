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

#include "pufl/numerics.hpp"

#include <cmath>

namespace pufl {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// BCE from the logit: log(1 + exp(-|z|)) + max(z,0) - z*y.
double bce_from_logit(double z, double y) {
  return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * y;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::domain_error(std::string("non-finite value in ") + what);
  }
}

struct MlpView {
  // Maps the flat parameter vector onto the layer views.
  Eigen::Map<const Matrix> w1;
  Eigen::Map<const Vector> b1;
  Eigen::Map<const Vector> w2;
  double b2;

  MlpView(const Model& m)
      : w1(m.params.data(), m.hidden_width, m.input_dim),
        b1(m.params.data() + m.hidden_width * m.input_dim, m.hidden_width),
        w2(m.params.data() + m.hidden_width * (m.input_dim + 1), m.hidden_width),
        b2(m.params(m.params.size() - 1)) {}
};

double mlp_logit(const Model& m, const Vector& x, Vector* hidden_out = nullptr) {
  MlpView v(m);
  Vector a = (v.w1 * x + v.b1).array().tanh();
  if (hidden_out != nullptr) *hidden_out = a;
  return v.w2.dot(a) + v.b2;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kMlp: return "mlp";
  }
  return "unknown";
}

int Model::param_count(ModelKind kind, int input_dim, int hidden_width) {
  switch (kind) {
    case ModelKind::kLinear:
    case ModelKind::kLogistic:
      return input_dim + 1;
    case ModelKind::kMlp:
      return hidden_width * input_dim + 2 * hidden_width + 1;
  }
  return 0;
}

Model Model::make(ModelKind kind, int input_dim, int hidden_width) {
  if (input_dim < 1) throw std::invalid_argument("model input_dim must be >= 1");
  if (kind == ModelKind::kMlp) {
    if (hidden_width < 1 || hidden_width > 16) {
      throw std::invalid_argument("mlp hidden_width must be in [1,16]");
    }
  } else {
    hidden_width = 0;
  }
  Model m;
  m.kind = kind;
  m.input_dim = input_dim;
  m.hidden_width = hidden_width;
  m.params = Vector::Zero(param_count(kind, input_dim, hidden_width));
  return m;
}

void Model::validate() const {
  if (params.size() != param_count(kind, input_dim, hidden_width)) {
    throw std::invalid_argument("model parameter length does not match shape metadata");
  }
}

Dataset::Dataset(Matrix x, Vector y) : features(std::move(x)), labels(std::move(y)) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("dataset feature/label row count mismatch");
  }
  if (features.rows() < 1) throw std::invalid_argument("dataset must have n >= 1");
  features = features.cwiseMax(0.0).cwiseMin(1.0);
}

double predict(const Model& model, const Vector& x) {
  model.validate();
  if (x.size() != model.input_dim) {
    throw std::invalid_argument("predict: input dimension mismatch");
  }
  switch (model.kind) {
    case ModelKind::kLinear:
      return model.params.head(model.input_dim).dot(x) + model.params(model.input_dim);
    case ModelKind::kLogistic:
      return sigmoid(model.params.head(model.input_dim).dot(x) + model.params(model.input_dim));
    case ModelKind::kMlp:
      return mlp_logit(model, x);
  }
  return 0.0;
}

double loss_sample(const Model& model, const Vector& x, double y) {
  switch (model.kind) {
    case ModelKind::kLinear: {
      const double r = predict(model, x) - y;
      return r * r;
    }
    case ModelKind::kLogistic: {
      const double z =
          model.params.head(model.input_dim).dot(x) + model.params(model.input_dim);
      return bce_from_logit(z, y);
    }
    case ModelKind::kMlp:
      return bce_from_logit(mlp_logit(model, x), y);
  }
  return 0.0;
}

double loss_mean(const Model& model, const Dataset& data) {
  model.validate();
  if (data.size() < 1) throw std::invalid_argument("loss_mean: empty dataset");
  if (data.dim() != model.input_dim) {
    throw std::invalid_argument("loss_mean: input dimension mismatch");
  }
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    total += loss_sample(model, data.features.row(i).transpose(), data.labels(i));
  }
  const double v = total / data.size();
  check_finite(v, "loss_mean");
  return v;
}

Vector grad_params(const Model& model, const Dataset& data) {
  model.validate();
  if (data.size() < 1) throw std::invalid_argument("grad_params: empty dataset");
  if (data.dim() != model.input_dim) {
    throw std::invalid_argument("grad_params: input dimension mismatch");
  }
  const int n = data.size();
  const int d = model.input_dim;
  Vector g = Vector::Zero(model.params.size());
  switch (model.kind) {
    case ModelKind::kLinear: {
      // d/dw (w.x + b - y)^2 = 2 r x, d/db = 2 r
      for (int i = 0; i < n; ++i) {
        const Vector x = data.features.row(i).transpose();
        const double r = model.params.head(d).dot(x) + model.params(d) - data.labels(i);
        g.head(d) += 2.0 * r * x;
        g(d) += 2.0 * r;
      }
      break;
    }
    case ModelKind::kLogistic: {
      // d BCE / dz = p - y
      for (int i = 0; i < n; ++i) {
        const Vector x = data.features.row(i).transpose();
        const double z = model.params.head(d).dot(x) + model.params(d);
        const double e = sigmoid(z) - data.labels(i);
        g.head(d) += e * x;
        g(d) += e;
      }
      break;
    }
    case ModelKind::kMlp: {
      const int h = model.hidden_width;
      MlpView v(model);
      for (int i = 0; i < n; ++i) {
        const Vector x = data.features.row(i).transpose();
        Vector a;
        const double z = mlp_logit(model, x, &a);
        const double e = sigmoid(z) - data.labels(i);
        const Vector da = (1.0 - a.array().square()).matrix();  // tanh'
        const Vector dh = e * v.w2.cwiseProduct(da);
        Eigen::Map<Matrix> gw1(g.data(), h, d);
        gw1 += dh * x.transpose();
        g.segment(h * d, h) += dh;
        g.segment(h * (d + 1), h) += e * a;
        g(g.size() - 1) += e;
      }
      break;
    }
  }
  g /= static_cast<double>(n);
  check_finite(g.sum(), "grad_params");
  return g;
}

Vector grad_inputs(const Model& model, const Vector& x, double y) {
  model.validate();
  if (x.size() != model.input_dim) {
    throw std::invalid_argument("grad_inputs: input dimension mismatch");
  }
  const int d = model.input_dim;
  switch (model.kind) {
    case ModelKind::kLinear: {
      const double r = model.params.head(d).dot(x) + model.params(d) - y;
      return (2.0 * r * model.params.head(d)).eval();
    }
    case ModelKind::kLogistic: {
      const double z = model.params.head(d).dot(x) + model.params(d);
      return ((sigmoid(z) - y) * model.params.head(d)).eval();
    }
    case ModelKind::kMlp: {
      MlpView v(model);
      Vector a;
      const double z = mlp_logit(model, x, &a);
      const double e = sigmoid(z) - y;
      const Vector da = (1.0 - a.array().square()).matrix();
      return (e * v.w1.transpose() * v.w2.cwiseProduct(da)).eval();
    }
  }
  return Vector::Zero(d);
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& point, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  Vector g(point.size());
  Vector p = point;
  for (int i = 0; i < point.size(); ++i) {
    const double x0 = p(i);
    p(i) = x0 + h;
    const double fp = f(p);
    p(i) = x0 - h;
    const double fm = f(p);
    p(i) = x0;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::domain_error("finite_diff_grad: non-finite function value");
    }
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vector gd_step(const Vector& params, const Vector& grad, double lr) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("gd_step: length mismatch");
  }
  if (lr <= 0.0) throw std::invalid_argument("gd_step: lr must be > 0");
  return params - lr * grad;
}

Vector project_outside_ball(const Vector& delta, double eps1,
                            const Vector& fallback_direction) {
  if (eps1 < 0.0) throw std::invalid_argument("project_outside_ball: eps1 must be >= 0");
  const double n = delta.norm();
  if (n >= eps1) return delta;
  if (n == 0.0) return eps1 * fallback_direction;
  return delta * (eps1 / n);
}

Vector project_inside_ball(const Vector& delta, double eps) {
  if (eps < 0.0) throw std::invalid_argument("project_inside_ball: eps must be >= 0");
  const double n = delta.norm();
  if (n <= eps) return delta;
  if (n == 0.0) return delta;
  return delta * (eps / n);
}

}  // namespace pufl
