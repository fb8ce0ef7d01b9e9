#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "linkpred/graph.hpp"
#include "linkpred/partition.hpp"
#include "linkpred/sampler.hpp"

namespace linkpred {

// Edge-list CSV with header `source,target`, one undirected edge per row,
// external string ids.
std::vector<std::pair<std::string, std::string>> read_edge_csv(
    const std::filesystem::path& path);

void write_edge_csv(const std::filesystem::path& path,
                    const Graph& g, const NodeTable& table);

// Node-attribute TSV (header row, first column is the node id) plus a
// sidecar JSON schema mapping each attribute column to
// "numeric" | "categorical" | "text".
NodeTable read_node_table(const std::filesystem::path& tsv_path,
                          const std::filesystem::path& schema_path);

// Interns endpoints into `table` (populating it when empty) and builds the
// dense-index graph. Node ids already in the table keep their indices, so
// a TSV-defined node universe stays aligned.
Graph graph_from_string_edges(
    const std::vector<std::pair<std::string, std::string>>& edges,
    NodeTable& table);

// Persisted split: CSV `u,v,label,role` with external ids, replayable.
void write_split_csv(const std::filesystem::path& path, const Datasets& data,
                     const NodeTable& table);
Datasets read_split_csv(const std::filesystem::path& path, const NodeTable& table);

// CSV `node,community`.
void write_communities_csv(const std::filesystem::path& path, const Partition& p,
                           const NodeTable& table);

}  // namespace linkpred
