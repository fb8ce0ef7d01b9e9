#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "linkpred/graph.hpp"
#include "linkpred/partition.hpp"

namespace linkpred {

// Planted-partition random graph used as a synthetic test fixture.
struct BlockModelSpec {
  std::vector<std::int32_t> block_sizes;
  double p_in = 0.0;
  double p_out = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Samples each intra-block pair with probability p_in and each inter-block
// pair with p_out. Pairs are visited in lexicographic order with exactly one
// RNG draw per pair, so a spec maps to one graph, bit for bit.
std::pair<Graph, Partition> generate_sbm(const BlockModelSpec& spec);

}  // namespace linkpred
