#include "linkpred/heuristics.hpp"

#include <cmath>
#include <stdexcept>

#include "linkpred/rng.hpp"

namespace linkpred {

HeuristicMethod HeuristicMethod::with_defaults(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::Random:             return {kind, 0.0};
    case HeuristicKind::CommonNeighbors:    return {kind, 1.0};
    case HeuristicKind::Jaccard:            return {kind, 0.01};
    case HeuristicKind::AdamicAdar:         return {kind, 0.5};
    case HeuristicKind::ResourceAllocation: return {kind, 0.01};
  }
  throw std::invalid_argument("heuristics: unknown kind");
}

double heuristic_score(const Graph& g, HeuristicKind kind, NodeId u, NodeId v) {
  if (kind == HeuristicKind::Random) {
    throw std::invalid_argument("heuristics: Random is scoreless");
  }
  if (u == v) throw std::invalid_argument("heuristics: u == v");

  const auto nu = g.neighbors(u);
  const auto nv = g.neighbors(v);

  // Two-pointer walk over the sorted adjacency rows; common neighbors are
  // visited in ascending order, which fixes the summation order.
  double acc = 0.0;
  std::int64_t common = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < nu.size() && j < nv.size()) {
    if (nu[i] < nv[j]) {
      ++i;
    } else if (nu[i] > nv[j]) {
      ++j;
    } else {
      const NodeId w = nu[i];
      ++common;
      if (kind == HeuristicKind::AdamicAdar) {
        acc += 1.0 / std::log(static_cast<double>(g.degree(w)));
      } else if (kind == HeuristicKind::ResourceAllocation) {
        acc += 1.0 / static_cast<double>(g.degree(w));
      }
      ++i;
      ++j;
    }
  }

  switch (kind) {
    case HeuristicKind::CommonNeighbors:
      return static_cast<double>(common);
    case HeuristicKind::Jaccard: {
      const std::int64_t uni =
          static_cast<std::int64_t>(nu.size()) + static_cast<std::int64_t>(nv.size()) - common;
      return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
    }
    case HeuristicKind::AdamicAdar:
    case HeuristicKind::ResourceAllocation:
      return acc;
    case HeuristicKind::Random:
      break;
  }
  throw std::invalid_argument("heuristics: unknown kind");
}

std::vector<int> heuristic_predict(const Graph& g, const HeuristicMethod& method,
                                   std::span<const NodePair> pairs,
                                   std::uint64_t seed) {
  if (method.kind == HeuristicKind::Random) {
    return random_predict(pairs, seed);
  }
  std::vector<int> labels;
  labels.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    labels.push_back(heuristic_score(g, method.kind, u, v) >= method.threshold ? 1 : 0);
  }
  return labels;
}

std::vector<int> random_predict(std::span<const NodePair> pairs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels;
  labels.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    labels.push_back(rng.uniform() < 0.5 ? 1 : 0);
  }
  return labels;
}

}  // namespace linkpred
