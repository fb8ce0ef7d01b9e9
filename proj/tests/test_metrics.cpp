#include <doctest.h>

#include <cmath>

#include "linkpred/metrics.hpp"
#include "linkpred/rng.hpp"
#include "test_support.hpp"

using namespace linkpred;

TEST_SUITE("metrics") {

TEST_CASE("confusion counts") {
  const std::vector<int> y = {1, 1, 0};
  const std::vector<int> p = {1, 0, 0};
  const ConfusionMatrix cm = confusion(y, p);
  CHECK(cm.tp == 1);
  CHECK(cm.fn == 1);
  CHECK(cm.tn == 1);
  CHECK(cm.fp == 0);
  CHECK(cm.total() == 3);
}

TEST_CASE("confusion edge cases and validation") {
  const std::vector<int> y = {1, 0, 1};
  const ConfusionMatrix perfect = confusion(y, y);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);

  const std::vector<int> zeros = {0, 0, 0};
  const std::vector<int> ones = {1, 1, 1};
  CHECK(confusion(zeros, ones).fp == 3);

  CHECK_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{1}),
                  std::invalid_argument);
}

TEST_CASE("precision recall f1") {
  const ClassificationScores s = classification_metrics({3, 1, 0, 2});
  CHECK(s.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(s.recall == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(s.f1 == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35).epsilon(1e-9));

  CHECK(classification_metrics({0, 0, 5, 2}).precision == 0.0);  // degenerate rule
  CHECK(classification_metrics({0, 3, 5, 0}).recall == 0.0);

  const std::vector<int> y = {1, 0, 1};
  const ClassificationScores perfect = classification_metrics(confusion(y, y));
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
}

TEST_CASE("auc fixtures") {
  CHECK(auc(std::vector<int>{1, 1, 0, 0}, std::vector<double>{0.9, 0.8, 0.7, 0.1}) == 1.0);
  CHECK(auc(std::vector<int>{1, 1, 0, 0}, std::vector<double>{0.8, 0.4, 0.6, 0.2}) == 0.75);
  CHECK(auc(std::vector<int>{1, 0}, std::vector<double>{0.5, 0.5}) == 0.5);
  CHECK_THROWS_WITH_AS(auc(std::vector<int>{1, 1}, std::vector<double>{0.5, 0.4}),
                       doctest::Contains("AUC undefined"), std::invalid_argument);
}

TEST_CASE("auc equals the brute-force pair count") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.bounded(200);
    std::vector<int> y(n);
    std::vector<double> s(n);
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform() < 0.5 ? 1 : 0;
      s[i] = rng.uniform() < 0.2 ? 0.5 : rng.uniform();  // force some ties
      (y[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(auc(y, s) == doctest::Approx(testsupport::auc_bruteforce(y, s)).epsilon(1e-13));
  }
}

TEST_CASE("auc invariances") {
  Rng rng(7);
  std::vector<int> y;
  std::vector<double> s;
  for (int i = 0; i < 101; ++i) {
    y.push_back(i % 2);
    s.push_back(rng.uniform());
  }
  const double base = auc(y, s);

  std::vector<double> transformed;
  for (const double x : s) transformed.push_back(std::exp(3.0 * x) + 1.0);
  CHECK(auc(y, transformed) == doctest::Approx(base).epsilon(1e-12));

  std::vector<int> flipped;
  for (const int t : y) flipped.push_back(1 - t);
  CHECK(auc(flipped, s) == doctest::Approx(1.0 - base).epsilon(1e-12));
}

}  // TEST_SUITE
