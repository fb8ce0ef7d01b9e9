#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linkpred/features.hpp"

namespace linkpred {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct LogregOptions {
  double lr = 0.1;
  int epochs = 500;
  double l2 = 1e-4;  // applied to weights, not the bias
  std::uint64_t seed = 0;
};

struct LogregFit {
  LinearModel model;
  std::vector<double> loss_curve;  // regularized BCE per epoch
};

// Full-batch gradient descent on L2-regularized BCE from zero-initialized
// weights; deterministic.
LogregFit fit_logreg(const FeatureMatrix& x, std::span<const int> y,
                     const LogregOptions& options = {});

struct LogregPrediction {
  std::vector<double> probabilities;
  std::vector<int> labels;
};

// p = sigmoid(w.x + b); label 1 iff p >= threshold.
LogregPrediction predict_logreg(const LinearModel& model, const FeatureMatrix& x,
                                double threshold = 0.5);

// Objective and gradient at (w, b); exposed so the gradient can be checked
// against finite differences.
double logreg_loss(const LinearModel& model, const FeatureMatrix& x,
                   std::span<const int> y, double l2);
void logreg_gradient(const LinearModel& model, const FeatureMatrix& x,
                     std::span<const int> y, double l2,
                     std::vector<double>& grad_w, double& grad_b);

}  // namespace linkpred
