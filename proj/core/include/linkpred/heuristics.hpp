#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linkpred/graph.hpp"

namespace linkpred {

enum class HeuristicKind {
  Random,
  CommonNeighbors,
  Jaccard,
  AdamicAdar,
  ResourceAllocation,
};

// Score-and-threshold link predictor. Default thresholds: common neighbors
// 1, Jaccard 0.01, Adamic/Adar 0.5, resource allocation 0.01.
struct HeuristicMethod {
  HeuristicKind kind = HeuristicKind::CommonNeighbors;
  double threshold = 1.0;

  static HeuristicMethod with_defaults(HeuristicKind kind);
};

// Neighborhood-overlap score for a node pair:
//   CN      |N(u) ∩ N(v)|
//   Jaccard |N(u) ∩ N(v)| / |N(u) ∪ N(v)|   (0 when the union is empty)
//   AA      sum over common w of 1/ln(deg w)
//   RA      sum over common w of 1/deg w
// Throws for u == v and for the scoreless Random kind.
double heuristic_score(const Graph& g, HeuristicKind kind, NodeId u, NodeId v);

// Label 1 iff score >= threshold. The Random kind ignores the graph and
// assigns seeded fair-coin labels instead.
std::vector<int> heuristic_predict(const Graph& g, const HeuristicMethod& method,
                                   std::span<const NodePair> pairs,
                                   std::uint64_t seed = 0);

// Independent fair-coin labels, one per pair.
std::vector<int> random_predict(std::span<const NodePair> pairs, std::uint64_t seed);

}  // namespace linkpred
