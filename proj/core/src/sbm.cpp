#include "linkpred/sbm.hpp"

#include <numeric>
#include <stdexcept>

#include "linkpred/rng.hpp"

namespace linkpred {

void BlockModelSpec::validate() const {
  if (block_sizes.empty()) {
    throw std::invalid_argument("sbm: at least one block required");
  }
  for (const auto size : block_sizes) {
    if (size <= 0) throw std::invalid_argument("sbm: block sizes must be positive");
  }
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) {
    throw std::invalid_argument("sbm: probabilities must lie in [0,1]");
  }
}

std::pair<Graph, Partition> generate_sbm(const BlockModelSpec& spec) {
  spec.validate();
  const NodeId n = std::accumulate(spec.block_sizes.begin(),
                                   spec.block_sizes.end(), NodeId{0});

  Partition truth;
  truth.k = static_cast<std::int32_t>(spec.block_sizes.size());
  truth.community_of.reserve(static_cast<std::size_t>(n));
  for (std::int32_t b = 0; b < truth.k; ++b) {
    for (std::int32_t i = 0; i < spec.block_sizes[static_cast<std::size_t>(b)]; ++i) {
      truth.community_of.push_back(b);
    }
  }

  Rng rng(spec.seed);
  std::vector<NodePair> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      // One draw per pair regardless of outcome keeps the stream aligned
      // across parameter changes.
      const double draw = rng.uniform();
      const double p = truth.community_of[static_cast<std::size_t>(u)] ==
                               truth.community_of[static_cast<std::size_t>(v)]
                           ? spec.p_in
                           : spec.p_out;
      if (draw < p) edges.emplace_back(u, v);
    }
  }
  return {Graph::from_edges(edges, n), std::move(truth)};
}

}  // namespace linkpred
