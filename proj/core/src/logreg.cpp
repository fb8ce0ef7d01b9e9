#include "linkpred/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace linkpred {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot_row(const FeatureMatrix& x, std::int64_t row, const std::vector<double>& w) {
  double acc = 0.0;
  for (const auto& e : x.row(row)) acc += e.value * w[static_cast<std::size_t>(e.col)];
  return acc;
}

void check_dims(const LinearModel& model, const FeatureMatrix& x) {
  if (static_cast<std::int64_t>(model.weights.size()) != x.cols()) {
    throw std::invalid_argument("logreg: weight length != feature dimension");
  }
}

}  // namespace

double logreg_loss(const LinearModel& model, const FeatureMatrix& x,
                   std::span<const int> y, double l2) {
  check_dims(model, x);
  constexpr double lo = 1e-7;
  constexpr double hi = 1.0 - 1e-7;
  double total = 0.0;
  for (std::int64_t i = 0; i < x.rows(); ++i) {
    const double p =
        std::clamp(sigmoid(dot_row(x, i, model.weights) + model.bias), lo, hi);
    const double yi = y[static_cast<std::size_t>(i)];
    total += -(yi * std::log(p) + (1.0 - yi) * std::log(1.0 - p));
  }
  double reg = 0.0;
  for (const double w : model.weights) reg += w * w;
  return total / static_cast<double>(x.rows()) + 0.5 * l2 * reg;
}

void logreg_gradient(const LinearModel& model, const FeatureMatrix& x,
                     std::span<const int> y, double l2,
                     std::vector<double>& grad_w, double& grad_b) {
  check_dims(model, x);
  grad_w.assign(model.weights.size(), 0.0);
  grad_b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::int64_t i = 0; i < x.rows(); ++i) {
    const double p = sigmoid(dot_row(x, i, model.weights) + model.bias);
    const double residual = (p - static_cast<double>(y[static_cast<std::size_t>(i)])) * inv_n;
    for (const auto& e : x.row(i)) {
      grad_w[static_cast<std::size_t>(e.col)] += residual * e.value;
    }
    grad_b += residual;
  }
  for (std::size_t j = 0; j < grad_w.size(); ++j) grad_w[j] += l2 * model.weights[j];
}

LogregFit fit_logreg(const FeatureMatrix& x, std::span<const int> y,
                     const LogregOptions& options) {
  if (static_cast<std::int64_t>(y.size()) != x.rows()) {
    throw std::invalid_argument("logreg: rows != labels");
  }
  if (x.rows() == 0) throw std::invalid_argument("logreg: empty training set");

  LogregFit fit;
  fit.model.weights.assign(static_cast<std::size_t>(x.cols()), 0.0);
  fit.model.bias = 0.0;
  fit.loss_curve.reserve(static_cast<std::size_t>(options.epochs));

  std::vector<double> grad_w;
  double grad_b = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    fit.loss_curve.push_back(logreg_loss(fit.model, x, y, options.l2));
    logreg_gradient(fit.model, x, y, options.l2, grad_w, grad_b);
    for (std::size_t j = 0; j < grad_w.size(); ++j) {
      fit.model.weights[j] -= options.lr * grad_w[j];
    }
    fit.model.bias -= options.lr * grad_b;
  }
  return fit;
}

LogregPrediction predict_logreg(const LinearModel& model, const FeatureMatrix& x,
                                double threshold) {
  check_dims(model, x);
  LogregPrediction out;
  out.probabilities.reserve(static_cast<std::size_t>(x.rows()));
  out.labels.reserve(static_cast<std::size_t>(x.rows()));
  for (std::int64_t i = 0; i < x.rows(); ++i) {
    const double p = sigmoid(dot_row(x, i, model.weights) + model.bias);
    out.probabilities.push_back(p);
    out.labels.push_back(p >= threshold ? 1 : 0);
  }
  return out;
}

}  // namespace linkpred
