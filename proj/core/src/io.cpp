#include "linkpred/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace linkpred {
namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_edge_csv(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "source,target") {
    throw std::runtime_error(path.string() + ": expected header 'source,target'");
  }
  std::vector<std::pair<std::string, std::string>> edges;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'source,target'");
    }
    edges.emplace_back(fields[0], fields[1]);
  }
  return edges;
}

void write_edge_csv(const std::filesystem::path& path, const Graph& g,
                    const NodeTable& table) {
  auto out = open_output(path);
  out << "source,target\n";
  for (const auto& [u, v] : g.edges()) {
    out << table.external_ids[static_cast<std::size_t>(u)] << ','
        << table.external_ids[static_cast<std::size_t>(v)] << '\n';
  }
}

NodeTable read_node_table(const std::filesystem::path& tsv_path,
                          const std::filesystem::path& schema_path) {
  nlohmann::json schema;
  {
    auto in = open_input(schema_path);
    in >> schema;
  }
  auto kind_of = [&](const std::string& column) {
    if (!schema.contains(column)) {
      throw std::runtime_error(schema_path.string() + ": no tag for column '" +
                               column + "'");
    }
    const auto tag = schema.at(column).get<std::string>();
    if (tag == "numeric") return ColumnKind::Numeric;
    if (tag == "categorical") return ColumnKind::Categorical;
    if (tag == "text") return ColumnKind::Text;
    throw std::runtime_error(schema_path.string() + ": column '" + column +
                             "' has unknown tag '" + tag + "'");
  };

  auto in = open_input(tsv_path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(tsv_path.string() + ": missing header row");
  }
  const auto header = split(strip_cr(line), '\t');
  if (header.size() < 2) {
    throw std::runtime_error(tsv_path.string() + ": need an id column and at least one attribute");
  }

  NodeTable table;
  for (std::size_t c = 1; c < header.size(); ++c) {
    table.columns.push_back({header[c], kind_of(header[c]), {}});
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != header.size()) {
      throw std::runtime_error(tsv_path.string() + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(header.size()) + " fields");
    }
    if (table.index_of.contains(fields[0])) {
      throw std::runtime_error(tsv_path.string() + ":" + std::to_string(lineno) +
                               ": duplicate node id '" + fields[0] + "'");
    }
    table.intern(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      table.columns[c - 1].values.push_back(fields[c]);
    }
  }
  return table;
}

Graph graph_from_string_edges(
    const std::vector<std::pair<std::string, std::string>>& edges,
    NodeTable& table) {
  const bool closed_universe = table.size() > 0;
  std::vector<NodePair> pairs;
  pairs.reserve(edges.size());
  for (const auto& [src, dst] : edges) {
    const NodeId u = closed_universe ? table.index(src) : table.intern(src);
    const NodeId v = closed_universe ? table.index(dst) : table.intern(dst);
    pairs.emplace_back(u, v);
  }
  return Graph::from_edges(pairs, table.size() > 0 ? std::optional<NodeId>(table.size())
                                                   : std::nullopt);
}

void write_split_csv(const std::filesystem::path& path, const Datasets& data,
                     const NodeTable& table) {
  auto out = open_output(path);
  out << "u,v,label,role\n";
  auto dump = [&](const LabeledPairSet& set, const char* role) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      out << table.external_ids[static_cast<std::size_t>(set.pairs[i].first)] << ','
          << table.external_ids[static_cast<std::size_t>(set.pairs[i].second)] << ','
          << set.labels[i] << ',' << role << '\n';
    }
  };
  dump(data.train, "train");
  dump(data.test, "test");
}

Datasets read_split_csv(const std::filesystem::path& path, const NodeTable& table) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "u,v,label,role") {
    throw std::runtime_error(path.string() + ": expected header 'u,v,label,role'");
  }
  Datasets data;
  data.train.role = SplitRole::Train;
  data.test.role = SplitRole::Test;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'u,v,label,role'");
    }
    const auto pair = canonical_pair(table.index(fields[0]), table.index(fields[1]));
    const int label = fields[2] == "1" ? 1 : (fields[2] == "0" ? 0 : -1);
    if (label < 0) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": label must be 0 or 1");
    }
    if (fields[3] == "train") {
      data.train.pairs.push_back(pair);
      data.train.labels.push_back(label);
    } else if (fields[3] == "test") {
      data.test.pairs.push_back(pair);
      data.test.labels.push_back(label);
    } else {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": role must be train or test");
    }
  }
  data.train.validate();
  data.test.validate();
  return data;
}

void write_communities_csv(const std::filesystem::path& path, const Partition& p,
                           const NodeTable& table) {
  auto out = open_output(path);
  out << "node,community\n";
  for (std::size_t u = 0; u < p.num_nodes(); ++u) {
    out << table.external_ids[u] << ',' << p.community_of[u] << '\n';
  }
}

}  // namespace linkpred
