#include <doctest.h>

#include <cmath>

#include "linkpred/heuristics.hpp"
#include "test_support.hpp"

using namespace linkpred;

namespace {

Graph path4() {
  return Graph::from_edges(std::vector<NodePair>{{0, 1}, {1, 2}, {2, 3}});
}

}  // namespace

TEST_SUITE("heuristics") {

TEST_CASE("path fixture scores") {
  const Graph g = path4();
  CHECK(heuristic_score(g, HeuristicKind::CommonNeighbors, 0, 2) == 1.0);
  CHECK(heuristic_score(g, HeuristicKind::Jaccard, 0, 2) == 0.5);
  CHECK(heuristic_score(g, HeuristicKind::AdamicAdar, 0, 2) ==
        doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-12));
  CHECK(heuristic_score(g, HeuristicKind::ResourceAllocation, 0, 2) == 0.5);

  const Graph k3 = Graph::from_edges(std::vector<NodePair>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(heuristic_score(k3, HeuristicKind::Jaccard, 0, 1) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("scoreless and degenerate arguments") {
  const Graph g = path4();
  CHECK_THROWS_AS(heuristic_score(g, HeuristicKind::Random, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(heuristic_score(g, HeuristicKind::Jaccard, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(heuristic_score(g, HeuristicKind::Jaccard, 0, 9), std::out_of_range);
}

TEST_CASE("default thresholds") {
  CHECK(HeuristicMethod::with_defaults(HeuristicKind::CommonNeighbors).threshold == 1.0);
  CHECK(HeuristicMethod::with_defaults(HeuristicKind::Jaccard).threshold == 0.01);
  CHECK(HeuristicMethod::with_defaults(HeuristicKind::AdamicAdar).threshold == 0.5);
  CHECK(HeuristicMethod::with_defaults(HeuristicKind::ResourceAllocation).threshold == 0.01);
}

TEST_CASE("thresholded prediction on the path fixture") {
  const Graph g = path4();
  const std::vector<NodePair> pairs = {{0, 2}, {0, 3}};

  const auto cn = heuristic_predict(
      g, HeuristicMethod::with_defaults(HeuristicKind::CommonNeighbors), pairs);
  CHECK(cn == std::vector<int>{1, 0});

  const auto jac = heuristic_predict(
      g, HeuristicMethod::with_defaults(HeuristicKind::Jaccard), pairs);
  CHECK(jac[0] == 1);

  const auto aa = heuristic_predict(
      g, HeuristicMethod::with_defaults(HeuristicKind::AdamicAdar), pairs);
  CHECK(aa[0] == 1);  // 1.4427 >= 0.5
}

TEST_CASE("random baseline") {
  std::vector<NodePair> pairs(10000, {0, 1});
  const auto a = random_predict(pairs, 42);
  const auto b = random_predict(pairs, 42);
  CHECK(a == b);

  double ones = 0;
  for (const int label : a) ones += label;
  // fair coin: expect 0.5 within 3 sigma = 3*0.005
  CHECK(std::abs(ones / 10000.0 - 0.5) < 0.015);

  CHECK(random_predict({}, 1).empty());
}

TEST_CASE("scores match the set-arithmetic oracle exactly") {
  int graphs_checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const NodeId n = 2 + static_cast<NodeId>(seed % 7);  // 2..8
    const Graph g = testsupport::random_graph(n, 0.4, seed * 31 + 1);
    ++graphs_checked;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        const testsupport::HeuristicOracle oracle(g, u, v);
        CHECK(heuristic_score(g, HeuristicKind::CommonNeighbors, u, v) ==
              oracle.common_neighbors());
        CHECK(heuristic_score(g, HeuristicKind::Jaccard, u, v) == oracle.jaccard());
        CHECK(heuristic_score(g, HeuristicKind::AdamicAdar, u, v) ==
              oracle.adamic_adar(g));
        CHECK(heuristic_score(g, HeuristicKind::ResourceAllocation, u, v) ==
              oracle.resource_allocation(g));
      }
    }
  }
  CHECK(graphs_checked == 60);
}

TEST_CASE("scores are symmetric and bounded") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = testsupport::random_graph(12, 0.3, seed + 100);
    for (NodeId u = 0; u < 12; ++u) {
      for (NodeId v = u + 1; v < 12; ++v) {
        for (const auto kind :
             {HeuristicKind::CommonNeighbors, HeuristicKind::Jaccard,
              HeuristicKind::AdamicAdar, HeuristicKind::ResourceAllocation}) {
          const double s = heuristic_score(g, kind, u, v);
          CHECK(s == heuristic_score(g, kind, v, u));
          CHECK(s >= 0.0);
          CHECK(std::isfinite(s));
          if (kind == HeuristicKind::Jaccard) CHECK(s <= 1.0);
        }
      }
    }
  }
}

}  // TEST_SUITE
