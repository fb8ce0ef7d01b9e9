#include "linkpred/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace linkpred {

Graph Graph::from_edges(std::span<const NodePair> pairs,
                        std::optional<NodeId> node_count) {
  Graph g;
  NodeId max_index = -1;
  for (const auto& [u, v] : pairs) {
    if (u < 0 || v < 0) {
      throw std::invalid_argument("graph: negative node index");
    }
    if (u == v) {
      throw std::invalid_argument("graph: self-loop (" + std::to_string(u) +
                                  "," + std::to_string(v) + ") is not allowed");
    }
    max_index = std::max({max_index, u, v});
  }
  g.n_ = max_index + 1;
  if (node_count) {
    if (*node_count <= max_index) {
      throw std::invalid_argument("graph: node_count smaller than max index");
    }
    g.n_ = *node_count;
  }

  g.adjacency_.assign(static_cast<std::size_t>(g.n_), {});
  g.edges_.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    const std::uint64_t key = pair_key(u, v);
    if (!g.edge_keys_.insert(key).second) continue;  // duplicate or mirror
    const auto [a, b] = canonical_pair(u, v);
    g.edges_.emplace_back(a, b);
    g.adjacency_[static_cast<std::size_t>(a)].push_back(b);
    g.adjacency_[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& row : g.adjacency_) std::sort(row.begin(), row.end());
  std::sort(g.edges_.begin(), g.edges_.end());
  return g;
}

std::span<const NodeId> Graph::neighbors(NodeId u) const {
  if (u < 0 || u >= n_) {
    throw std::out_of_range("graph: node index " + std::to_string(u) +
                            " out of range [0," + std::to_string(n_) + ")");
  }
  return adjacency_[static_cast<std::size_t>(u)];
}

NodeId NodeTable::intern(const std::string& id) {
  if (const auto it = index_of.find(id); it != index_of.end()) {
    return it->second;
  }
  const NodeId idx = static_cast<NodeId>(external_ids.size());
  external_ids.push_back(id);
  index_of.emplace(id, idx);
  return idx;
}

NodeId NodeTable::index(const std::string& id) const {
  const auto it = index_of.find(id);
  if (it == index_of.end()) {
    throw std::out_of_range("node table: unknown id '" + id + "'");
  }
  return it->second;
}

}  // namespace linkpred
