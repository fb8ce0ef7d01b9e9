#include <doctest.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "linkpred/sampler.hpp"
#include "linkpred/sbm.hpp"
#include "test_support.hpp"

using namespace linkpred;

namespace {

Graph complete_graph(NodeId n) {
  std::vector<NodePair> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return Graph::from_edges(edges);
}

Graph two_triangles() {
  return Graph::from_edges(
      std::vector<NodePair>{{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}});
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("80:20 split sizes") {
  const Graph g = testsupport::random_graph(12, 0.3, 5);
  REQUIRE(g.num_edges() >= 10);
  // force exactly 10 edges by rebuilding from the first ten
  std::vector<NodePair> ten(g.edges().begin(), g.edges().begin() + 10);
  const Graph g10 = Graph::from_edges(ten, g.num_nodes());
  const EdgeSplit split = split_edges(g10, 0.2, 1);
  CHECK(split.train_edges.size() == 8);
  CHECK(split.test_edges.size() == 2);
}

TEST_CASE("test count rounds half to even") {
  auto n_test = [](std::int64_t m, double f) {
    std::vector<NodePair> edges;
    for (NodeId u = 0; u < m; ++u) edges.emplace_back(u, static_cast<NodeId>(m + u));
    const Graph g = Graph::from_edges(edges);
    return split_edges(g, f, 3).test_edges.size();
  };
  CHECK(n_test(10, 0.25) == 2);  // 2.5 -> 2
  CHECK(n_test(14, 0.25) == 4);  // 3.5 -> 4
  CHECK(n_test(10, 0.2) == 2);
}

TEST_CASE("split is deterministic and partitions the edge set") {
  const Graph g = testsupport::random_graph(30, 0.2, 11);
  const EdgeSplit a = split_edges(g, 0.2, 42);
  const EdgeSplit b = split_edges(g, 0.2, 42);
  CHECK(a.train_edges == b.train_edges);
  CHECK(a.test_edges == b.test_edges);

  std::vector<NodePair> all = a.train_edges;
  all.insert(all.end(), a.test_edges.begin(), a.test_edges.end());
  std::sort(all.begin(), all.end());
  CHECK(all == g.edges());
}

TEST_CASE("split rejects bad input") {
  const Graph g = testsupport::random_graph(10, 0.3, 2);
  CHECK_THROWS_AS(split_edges(g, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_edges(g, 1.0, 1), std::invalid_argument);
  const Graph empty = Graph::from_edges(std::vector<NodePair>{}, 4);
  CHECK_THROWS_WITH_AS(split_edges(empty, 0.2, 1), doctest::Contains("empty"),
                       std::invalid_argument);
}

TEST_CASE("non-links: complete graph has none") {
  const Graph k4 = complete_graph(4);
  CHECK_THROWS_WITH_AS(sample_non_links(k4, 1, {}, 1), doctest::Contains("short by"),
                       std::invalid_argument);
}

TEST_CASE("non-links: forced outcome on a path") {
  const Graph g = Graph::from_edges(std::vector<NodePair>{{0, 1}, {1, 2}});
  const auto picked = sample_non_links(g, 1, {}, 9);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] == NodePair{0, 2});
}

TEST_CASE("non-links: two triangles complement") {
  const Graph g = two_triangles();
  auto picked = sample_non_links(g, 9, {}, 4);
  std::sort(picked.begin(), picked.end());
  std::vector<NodePair> expected;
  for (NodeId u = 0; u < 3; ++u) {
    for (NodeId v = 3; v < 6; ++v) expected.emplace_back(u, v);
  }
  std::sort(expected.begin(), expected.end());
  CHECK(picked == expected);
}

TEST_CASE("non-links respect the exclusion set") {
  const Graph g = two_triangles();
  std::vector<NodePair> exclude = {{0, 3}, {0, 4}, {0, 5}};
  auto picked = sample_non_links(g, 6, exclude, 4);
  for (const auto& p : picked) {
    CHECK(std::find(exclude.begin(), exclude.end(), p) == exclude.end());
  }
  CHECK_THROWS_AS(sample_non_links(g, 7, exclude, 4), std::invalid_argument);
}

TEST_CASE("non-links via rejection sampling on a large pair space") {
  // C(2000,2) = 1999000 >= 1e6 exercises the index-rejection path
  std::vector<NodePair> edges;
  for (NodeId u = 0; u + 1 < 2000; u += 2) edges.emplace_back(u, u + 1);
  const Graph g = Graph::from_edges(edges, 2000);
  const auto a = sample_non_links(g, 500, {}, 77);
  const auto b = sample_non_links(g, 500, {}, 77);
  CHECK(a == b);
  std::unordered_set<std::uint64_t> seen;
  for (const auto& [u, v] : a) {
    CHECK(u < v);
    CHECK(v < 2000);
    CHECK_FALSE(g.has_edge(u, v));
    CHECK(seen.insert(pair_key(u, v)).second);
  }
  CHECK(a != sample_non_links(g, 500, {}, 78));
}

TEST_CASE("build_datasets sizes and balance") {
  std::vector<NodePair> edges;
  for (NodeId u = 0; u < 10; ++u) edges.emplace_back(u, static_cast<NodeId>(u + 10));
  const Graph g = Graph::from_edges(edges);
  const Datasets data = build_datasets(g, 0.2, 7);
  CHECK(data.train.size() == 16);
  CHECK(data.test.size() == 4);
  CHECK(data.train.positives() == 8);
  CHECK(data.test.positives() == 2);
}

TEST_CASE("dataset invariants on an SBM fixture") {
  BlockModelSpec spec;
  spec.block_sizes = {40, 40};
  spec.p_in = 0.25;
  spec.p_out = 0.02;
  spec.seed = 3;
  const auto [g, truth] = generate_sbm(spec);
  const Datasets data = build_datasets(g, 0.2, 42);
  data.train.validate();
  data.test.validate();

  std::set<NodePair> train_pos, test_pos, train_neg;
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    if (data.train.labels[i] == 1) {
      train_pos.insert(data.train.pairs[i]);
    } else {
      train_neg.insert(data.train.pairs[i]);
      CHECK_FALSE(g.has_edge(data.train.pairs[i].first, data.train.pairs[i].second));
    }
  }
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    if (data.test.labels[i] == 1) {
      test_pos.insert(data.test.pairs[i]);
    } else {
      CHECK_FALSE(g.has_edge(data.test.pairs[i].first, data.test.pairs[i].second));
      CHECK_FALSE(train_neg.contains(data.test.pairs[i]));  // negatives disjoint
    }
  }
  for (const auto& p : test_pos) CHECK_FALSE(train_pos.contains(p));
  CHECK(train_pos.size() + test_pos.size() == static_cast<std::size_t>(g.num_edges()));
}

TEST_CASE("datasets are deterministic; nearby seeds differ") {
  BlockModelSpec spec;
  spec.block_sizes = {50, 50};
  spec.p_in = 0.2;
  spec.p_out = 0.02;
  spec.seed = 8;
  const auto [g, truth] = generate_sbm(spec);

  const Datasets a = build_datasets(g, 0.2, 42);
  const Datasets b = build_datasets(g, 0.2, 42);
  CHECK(a.train.pairs == b.train.pairs);
  CHECK(a.test.pairs == b.test.pairs);
  CHECK(a.train.labels == b.train.labels);

  const Datasets c = build_datasets(g, 0.2, 43);
  CHECK(a.train.pairs != c.train.pairs);
}

}  // TEST_SUITE
