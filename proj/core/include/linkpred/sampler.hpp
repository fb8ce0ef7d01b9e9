#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linkpred/graph.hpp"

namespace linkpred {

enum class SplitRole { Train, Test };

// Canonicalized (u < v) node pairs with parallel binary labels. Positives
// are graph edges, negatives are sampled non-edges; counts are balanced.
struct LabeledPairSet {
  std::vector<NodePair> pairs;
  std::vector<int> labels;
  SplitRole role = SplitRole::Train;

  std::size_t size() const { return pairs.size(); }
  std::int64_t positives() const;
  void validate() const;  // canonical pairs, no duplicates, exact balance
};

struct EdgeSplit {
  std::vector<NodePair> train_edges;
  std::vector<NodePair> test_edges;
};

// Shuffles the edge list with the seeded RNG and assigns round-half-even
// m * test_fraction edges to test. Throws on an empty graph.
EdgeSplit split_edges(const Graph& g, double test_fraction, std::uint64_t seed);

// Draws `count` distinct canonical non-edges uniformly, excluding `exclude`.
// Throws when fewer than `count` candidates exist, naming the shortfall.
std::vector<NodePair> sample_non_links(const Graph& g, std::int64_t count,
                                       std::span<const NodePair> exclude,
                                       std::uint64_t seed);

struct Datasets {
  LabeledPairSet train;
  LabeledPairSet test;
};

// 80:20-style split plus class-balanced negatives for both roles. Train and
// test negatives are disjoint and never edges of the full graph.
Datasets build_datasets(const Graph& g, double test_fraction, std::uint64_t seed);

}  // namespace linkpred
