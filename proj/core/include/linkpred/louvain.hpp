#pragma once

#include <cstdint>

#include "linkpred/features.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/partition.hpp"

namespace linkpred {

// Newman modularity
//   Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)
// over ordered pairs including i = j. Computed from per-community
// aggregates, which is algebraically identical and exact on the
// degenerate fixtures. Throws when m = 0.
double modularity(const Graph& g, const Partition& p);

// Greedy two-phase Louvain: seeded-shuffle local moves, then community
// aggregation, repeated until a full pass improves Q by less than
// min_gain. Ties in move gain break toward the lowest community id, so a
// (graph, seed) pair maps to exactly one partition.
Partition louvain(const Graph& g, double min_gain = 1e-7, std::uint64_t seed = 0);

// n x k indicator matrix: row u is 1 at column community_of[u].
FeatureMatrix one_hot_communities(const Partition& p);

}  // namespace linkpred
