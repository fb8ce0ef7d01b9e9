#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace linkpred {

using NodeId = std::int32_t;
using NodePair = std::pair<NodeId, NodeId>;

inline NodePair canonical_pair(NodeId u, NodeId v) {
  return u < v ? NodePair{u, v} : NodePair{v, u};
}

inline std::uint64_t pair_key(NodeId u, NodeId v) {
  const auto [a, b] = canonical_pair(u, v);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Immutable undirected simple graph with dense node indices and sorted
// adjacency lists. Self-loops are rejected, parallel edges collapse.
class Graph {
 public:
  // Builds from (u,v) index pairs: deduplicates, symmetrizes, sorts.
  // node_count lets callers keep trailing isolated nodes; without it
  // n = 1 + max index seen (0 for an empty pair list).
  static Graph from_edges(std::span<const NodePair> pairs,
                          std::optional<NodeId> node_count = std::nullopt);

  NodeId num_nodes() const { return n_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }

  // Sorted neighbor indices of u. Throws std::out_of_range on a bad index.
  std::span<const NodeId> neighbors(NodeId u) const;

  NodeId degree(NodeId u) const {
    return static_cast<NodeId>(neighbors(u).size());
  }

  bool has_edge(NodeId u, NodeId v) const {
    if (u == v) return false;
    return edge_keys_.contains(pair_key(u, v));
  }

  // Canonical (u < v) edges in lexicographic order.
  const std::vector<NodePair>& edges() const { return edges_; }

 private:
  NodeId n_ = 0;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<NodePair> edges_;
  std::unordered_set<std::uint64_t> edge_keys_;
};

// Node attribute schema used by the feature pipeline.
enum class ColumnKind { Numeric, Categorical, Text };

struct AttributeColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::string> values;  // raw cell text, one entry per node
};

// Maps external string identifiers to the dense indices used everywhere
// else and carries the raw attribute columns.
struct NodeTable {
  std::vector<std::string> external_ids;
  std::unordered_map<std::string, NodeId> index_of;
  std::vector<AttributeColumn> columns;

  NodeId size() const { return static_cast<NodeId>(external_ids.size()); }

  // Registers an id if unseen; returns its dense index.
  NodeId intern(const std::string& id);

  // Throws std::out_of_range when the id is unknown.
  NodeId index(const std::string& id) const;
};

}  // namespace linkpred
