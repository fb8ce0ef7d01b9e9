#pragma once

#include <cstdint>
#include <span>

namespace linkpred {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
};

struct ClassificationScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Counts tp/fp/tn/fn for binary label vectors. Throws on length mismatch or
// a value outside {0,1}.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

// Precision/recall/F1; each is 0 when its denominator is 0.
ClassificationScores classification_metrics(const ConfusionMatrix& cm);

// Rank-based (Mann-Whitney) AUC with ties counted 1/2. Throws
// "AUC undefined" when only one class is present.
double auc(std::span<const int> y_true, std::span<const double> scores);

}  // namespace linkpred
