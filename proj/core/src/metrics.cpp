#include "linkpred/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace linkpred {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("confusion: length mismatch");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw std::invalid_argument("confusion: labels must be 0 or 1");
    }
    if (t == 1 && p == 1) ++cm.tp;
    else if (t == 0 && p == 1) ++cm.fp;
    else if (t == 0 && p == 0) ++cm.tn;
    else ++cm.fn;
  }
  return cm;
}

ClassificationScores classification_metrics(const ConfusionMatrix& cm) {
  ClassificationScores s;
  const double tp = static_cast<double>(cm.tp);
  if (cm.tp + cm.fp > 0) s.precision = tp / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn > 0) s.recall = tp / static_cast<double>(cm.tp + cm.fn);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

double auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) {
    throw std::invalid_argument("auc: length mismatch");
  }
  std::int64_t n_pos = 0;
  for (const int t : y_true) {
    if (t != 0 && t != 1) throw std::invalid_argument("auc: labels must be 0 or 1");
    n_pos += t;
  }
  const std::int64_t n = static_cast<std::int64_t>(y_true.size());
  const std::int64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("auc: AUC undefined for single-class input");
  }

  std::vector<std::size_t> order(y_true.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Rank sum over positives with average ranks for tied scores. Ranks are
  // integers or exact halves, so the sum is exact in double.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t t = i; t < j; ++t) {
      if (y_true[order[t]] == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double u_stat =
      rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u_stat / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace linkpred
