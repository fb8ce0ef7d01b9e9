#include "linkpred/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "linkpred/metrics.hpp"

namespace linkpred {
namespace {

using ad::Mat;
using ad::SpMat;
using ad::Tape;
using ad::Var;

constexpr char kCheckpointMagic[8] = {'L', 'P', 'C', 'K', 'P', 'T', '0', '1'};

struct Operators {
  SpMat norm_adj;
  SpMat mean_adj;
  SpMat mean_feat;  // mean_adj * features, constant input to SAGE layer 1
  AttentionEdges edges;
};

bool is_attention(Architecture a) {
  return a == Architecture::GAT || a == Architecture::GATv2;
}

Operators build_operators(const ModelConfig& cfg, const Graph& g, const SpMat& x) {
  Operators ops;
  ops.norm_adj = normalized_adjacency(g);
  if (cfg.architecture == Architecture::GraphSAGE) {
    ops.mean_adj = mean_adjacency(g);
    ops.mean_feat = ops.mean_adj * x;
  } else if (is_attention(cfg.architecture)) {
    ops.edges = attention_edges(g);
  }
  return ops;
}

void validate_config(const ModelConfig& cfg) {
  switch (cfg.architecture) {
    case Architecture::GCN:
    case Architecture::GraphSAGE:
      if (cfg.hidden_dims.size() != 3) {
        throw std::invalid_argument("gnn: this architecture takes three layer widths");
      }
      break;
    case Architecture::GAT:
    case Architecture::GATv2:
      if (cfg.hidden_dims.size() != 2 || cfg.heads.size() != 2) {
        throw std::invalid_argument("gnn: attention architectures take two layers");
      }
      if (cfg.heads[0] < 1 || cfg.heads[1] != 1) {
        throw std::invalid_argument("gnn: layer-2 attention uses a single head");
      }
      break;
    case Architecture::GCNv2:
      if (cfg.hidden_dims.size() != 1 || cfg.propagation_layers < 1) {
        throw std::invalid_argument("gnn: gcnv2 takes one width and >=1 propagation layers");
      }
      break;
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("gnn: dropout rate must lie in [0,1)");
  }
  for (const auto d : cfg.hidden_dims) {
    if (d < 1) throw std::invalid_argument("gnn: layer widths must be positive");
  }
}

Mat glorot(std::int64_t rows, std::int64_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      m(i, j) = rng.uniform(-limit, limit);
    }
  }
  return m;
}

// View of one training run's tape-resident parameters, by name.
struct ParamVars {
  std::unordered_map<std::string, Var> by_name;

  Var at(const std::string& name) const {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::logic_error("gnn: missing parameter '" + name + "'");
    }
    return it->second;
  }
};

ParamVars push_params(Tape& tape, const NamedParams& params, bool requires_grad,
                      std::vector<Var>* order = nullptr) {
  ParamVars vars;
  for (const auto& [name, value] : params) {
    const Var v = tape.leaf(value, requires_grad);
    vars.by_name.emplace(name, v);
    if (order) order->push_back(v);
  }
  return vars;
}

// Drops nonzeros of a constant sparse input (inverted scaling), used for
// the feature dropout in front of each attention layer stack.
SpMat sparse_dropout(const SpMat& x, double rate, std::uint64_t seed) {
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  SpMat out = x;
  for (int k = 0; k < out.outerSize(); ++k) {
    for (SpMat::InnerIterator it(out, k); it; ++it) {
      it.valueRef() = rng.uniform() < rate ? 0.0 : it.value() * keep_scale;
    }
  }
  return out;
}

std::uint64_t site_seed(std::uint64_t epoch_seed, int site) {
  return Rng::derive(epoch_seed + static_cast<std::uint64_t>(site) * 0x9e3779b9ull,
                     "dropout-site");
}

// Either the raw sparse input (layer 1) or a dense activation.
struct LayerInput {
  const SpMat* sparse = nullptr;
  Var dense;

  Var project(Tape& tape, Var w) const {
    return sparse ? tape.feature_matmul(*sparse, w) : tape.matmul(dense, w);
  }
};

Var gat_head(Tape& tape, const ModelConfig& cfg, const AttentionEdges& edges,
             std::int64_t n, Var hw, Var a_dst, Var a_src) {
  const Var s_dst = tape.matmul(hw, a_dst);
  const Var s_src = tape.matmul(hw, a_src);
  Var e = tape.add(tape.gather_rows(s_dst, edges.dst), tape.gather_rows(s_src, edges.src));
  e = tape.leaky_relu(e, cfg.leaky_slope);
  const Var alpha = tape.segment_softmax(e, edges.dst);
  const Var messages = tape.gather_rows(hw, edges.src);
  return tape.scatter_sum_rows(tape.row_scale(messages, alpha), edges.dst, n);
}

Var gatv2_head(Tape& tape, const ModelConfig& cfg, const AttentionEdges& edges,
               std::int64_t n, Var hw_dst, Var hw_src, Var attn) {
  Var e = tape.add(tape.gather_rows(hw_dst, edges.dst),
                   tape.gather_rows(hw_src, edges.src));
  e = tape.matmul(tape.leaky_relu(e, cfg.leaky_slope), attn);
  const Var alpha = tape.segment_softmax(e, edges.dst);
  const Var messages = tape.gather_rows(hw_src, edges.src);
  return tape.scatter_sum_rows(tape.row_scale(messages, alpha), edges.dst, n);
}

Var attention_layer(Tape& tape, const ModelConfig& cfg, const ParamVars& params,
                    const Operators& ops, std::int64_t n, const LayerInput& input,
                    int layer) {
  const int n_heads = cfg.heads[static_cast<std::size_t>(layer)];
  std::vector<Var> outputs;
  outputs.reserve(static_cast<std::size_t>(n_heads));
  const std::string prefix = "l" + std::to_string(layer) + ".h";
  for (int h = 0; h < n_heads; ++h) {
    const std::string base = prefix + std::to_string(h) + ".";
    if (cfg.architecture == Architecture::GAT) {
      const Var hw = input.project(tape, params.at(base + "W"));
      outputs.push_back(gat_head(tape, cfg, ops.edges, n, hw,
                                 params.at(base + "a_dst"), params.at(base + "a_src")));
    } else {
      const Var hw_dst = input.project(tape, params.at(base + "W_dst"));
      const Var hw_src = input.project(tape, params.at(base + "W_src"));
      outputs.push_back(
          gatv2_head(tape, cfg, ops.edges, n, hw_dst, hw_src, params.at(base + "a")));
    }
  }
  return n_heads == 1 ? outputs[0] : tape.concat_cols(outputs);
}

Var forward(Tape& tape, const ModelConfig& cfg, const ParamVars& params,
            const SpMat& x, const Operators& ops, bool train_mode,
            std::uint64_t epoch_seed) {
  const auto n = static_cast<std::int64_t>(x.rows());
  auto drop = [&](Var v, int site) {
    return tape.dropout(v, cfg.dropout, train_mode, site_seed(epoch_seed, site));
  };

  switch (cfg.architecture) {
    case Architecture::GCN: {
      Var h = tape.spmm(ops.norm_adj, tape.feature_matmul(x, params.at("l0.W")));
      h = drop(tape.relu(h), 0);
      h = tape.spmm(ops.norm_adj, tape.matmul(h, params.at("l1.W")));
      h = drop(tape.relu(h), 1);
      return tape.spmm(ops.norm_adj, tape.matmul(h, params.at("l2.W")));
    }

    case Architecture::GCNv2: {
      const Var h0 = tape.feature_matmul(x, params.at("l0.W"));
      Var h = h0;
      for (int l = 1; l <= cfg.propagation_layers; ++l) {
        const double beta = gcn2_layer_beta(cfg.theta, l);
        const Var propagated = tape.spmm(ops.norm_adj, h);
        const Var mixed = tape.add(tape.scale(propagated, 1.0 - cfg.alpha),
                                   tape.scale(h0, cfg.alpha));
        const Var mapped =
            tape.add(tape.scale(mixed, 1.0 - beta),
                     tape.scale(tape.matmul(mixed, params.at("l" + std::to_string(l) + ".W")),
                                beta));
        h = drop(tape.relu(mapped), l);
      }
      return h;
    }

    case Architecture::GraphSAGE: {
      Var h = tape.add(tape.feature_matmul(x, params.at("l0.W_self")),
                       tape.feature_matmul(ops.mean_feat, params.at("l0.W_neigh")));
      h = drop(tape.relu(h), 0);
      h = tape.add(tape.matmul(h, params.at("l1.W_self")),
                   tape.matmul(tape.spmm(ops.mean_adj, h), params.at("l1.W_neigh")));
      h = drop(tape.relu(h), 1);
      return tape.add(tape.matmul(h, params.at("l2.W_self")),
                      tape.matmul(tape.spmm(ops.mean_adj, h), params.at("l2.W_neigh")));
    }

    case Architecture::GAT:
    case Architecture::GATv2: {
      // Feature dropout precedes each attention layer.
      SpMat x_in;
      const SpMat* x_layer = &x;
      if (train_mode && cfg.dropout > 0.0) {
        x_in = sparse_dropout(x, cfg.dropout, site_seed(epoch_seed, 100));
        x_layer = &x_in;
      }
      Var h = attention_layer(tape, cfg, params, ops, n, LayerInput{x_layer, {}}, 0);
      h = drop(tape.elu(h), 1);
      return attention_layer(tape, cfg, params, ops, n, LayerInput{nullptr, h}, 1);
    }
  }
  throw std::logic_error("gnn: unknown architecture");
}

Mat embed_with_ops(const ModelConfig& cfg, const NamedParams& params, const SpMat& x,
                   const Operators& ops) {
  Tape tape;
  const ParamVars vars = push_params(tape, params, /*requires_grad=*/false);
  const Var z = forward(tape, cfg, vars, x, ops, /*train_mode=*/false, 0);
  return tape.value(z);
}

nlohmann::json config_to_json(const ModelConfig& cfg) {
  return {{"architecture", architecture_name(cfg.architecture)},
          {"hidden_dims", cfg.hidden_dims},
          {"heads", cfg.heads},
          {"dropout", cfg.dropout},
          {"lr", cfg.lr},
          {"max_epochs", cfg.max_epochs},
          {"early_stopping", cfg.early_stopping},
          {"patience", cfg.patience},
          {"validation_fraction", cfg.validation_fraction},
          {"alpha", cfg.alpha},
          {"theta", cfg.theta},
          {"propagation_layers", cfg.propagation_layers},
          {"leaky_slope", cfg.leaky_slope},
          {"seed", cfg.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.architecture = architecture_from_name(j.at("architecture").get<std::string>());
  cfg.hidden_dims = j.at("hidden_dims").get<std::vector<std::int64_t>>();
  cfg.heads = j.at("heads").get<std::vector<int>>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.lr = j.at("lr").get<double>();
  cfg.max_epochs = j.at("max_epochs").get<int>();
  cfg.early_stopping = j.at("early_stopping").get<bool>();
  cfg.patience = j.at("patience").get<int>();
  cfg.validation_fraction = j.at("validation_fraction").get<double>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.theta = j.at("theta").get<double>();
  cfg.propagation_layers = j.at("propagation_layers").get<int>();
  cfg.leaky_slope = j.at("leaky_slope").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

std::string architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::GAT:       return "gat";
    case Architecture::GATv2:     return "gatv2";
    case Architecture::GCN:       return "gcn";
    case Architecture::GCNv2:     return "gcnv2";
    case Architecture::GraphSAGE: return "graphsage";
  }
  throw std::invalid_argument("gnn: unknown architecture");
}

Architecture architecture_from_name(std::string_view name) {
  if (name == "gat") return Architecture::GAT;
  if (name == "gatv2") return Architecture::GATv2;
  if (name == "gcn") return Architecture::GCN;
  if (name == "gcnv2") return Architecture::GCNv2;
  if (name == "graphsage") return Architecture::GraphSAGE;
  throw std::invalid_argument("gnn: unknown architecture '" + std::string(name) + "'");
}

ModelConfig ModelConfig::defaults(Architecture arch) {
  ModelConfig cfg;
  cfg.architecture = arch;
  switch (arch) {
    case Architecture::GAT:
      cfg.hidden_dims = {64, 16};
      cfg.heads = {4, 1};
      cfg.dropout = 0.6;
      cfg.lr = 0.01;
      break;
    case Architecture::GATv2:
      cfg.hidden_dims = {64, 48};
      cfg.heads = {4, 1};
      cfg.dropout = 0.6;
      cfg.lr = 0.02;
      cfg.early_stopping = true;
      break;
    case Architecture::GCN:
      cfg.hidden_dims = {512, 128, 32};
      cfg.dropout = 0.5;
      cfg.lr = 0.01;
      break;
    case Architecture::GCNv2:
      cfg.hidden_dims = {48};
      cfg.dropout = 0.5;
      cfg.lr = 0.02;
      cfg.early_stopping = true;
      break;
    case Architecture::GraphSAGE:
      cfg.hidden_dims = {512, 128, 32};
      cfg.dropout = 0.5;
      cfg.lr = 0.01;
      break;
  }
  return cfg;
}

ad::SpMat normalized_adjacency(const Graph& g) {
  const auto n = static_cast<std::int64_t>(g.num_nodes());
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) {
    inv_sqrt[static_cast<std::size_t>(u)] =
        1.0 / std::sqrt(static_cast<double>(g.degree(u)) + 1.0);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * g.num_edges() + n));
  for (NodeId u = 0; u < n; ++u) {
    const double du = inv_sqrt[static_cast<std::size_t>(u)];
    triplets.emplace_back(u, u, du * du);
    for (const NodeId v : g.neighbors(u)) {
      triplets.emplace_back(u, v, du * inv_sqrt[static_cast<std::size_t>(v)]);
    }
  }
  SpMat a_hat(n, n);
  a_hat.setFromTriplets(triplets.begin(), triplets.end());
  return a_hat;
}

ad::SpMat mean_adjacency(const Graph& g) {
  const auto n = static_cast<std::int64_t>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * g.num_edges()));
  for (NodeId u = 0; u < n; ++u) {
    const auto deg = g.degree(u);
    if (deg == 0) continue;
    const double w = 1.0 / static_cast<double>(deg);
    for (const NodeId v : g.neighbors(u)) triplets.emplace_back(u, v, w);
  }
  SpMat mean(n, n);
  mean.setFromTriplets(triplets.begin(), triplets.end());
  return mean;
}

AttentionEdges attention_edges(const Graph& g) {
  AttentionEdges edges;
  const auto n = g.num_nodes();
  edges.dst.reserve(static_cast<std::size_t>(2 * g.num_edges() + n));
  edges.src.reserve(edges.dst.capacity());
  for (NodeId u = 0; u < n; ++u) {
    edges.dst.push_back(u);  // self-loop first, then sorted neighbors
    edges.src.push_back(u);
    for (const NodeId v : g.neighbors(u)) {
      edges.dst.push_back(u);
      edges.src.push_back(v);
    }
  }
  return edges;
}

double gcn2_layer_beta(double theta, int layer) {
  if (layer < 1) throw std::invalid_argument("gcn2: layers are 1-based");
  return std::log(theta / static_cast<double>(layer) + 1.0);
}

FeatureMatrix adjacency_features(const Graph& g) {
  const SpMat a_hat = normalized_adjacency(g);
  std::vector<std::vector<FeatureMatrix::Entry>> rows(
      static_cast<std::size_t>(a_hat.rows()));
  for (int u = 0; u < a_hat.outerSize(); ++u) {
    for (SpMat::InnerIterator it(a_hat, u); it; ++it) {
      rows[static_cast<std::size_t>(u)].push_back(
          {static_cast<std::int32_t>(it.col()), it.value()});
    }
  }
  return FeatureMatrix::from_rows(
      rows, a_hat.cols(),
      std::vector<FeatureProvenance>(static_cast<std::size_t>(a_hat.cols()),
                                     FeatureProvenance::Numeric));
}

ad::SpMat to_sparse(const FeatureMatrix& x) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(x.nonzeros()));
  for (std::int64_t i = 0; i < x.rows(); ++i) {
    for (const auto& e : x.row(i)) {
      triplets.emplace_back(static_cast<int>(i), e.col, e.value);
    }
  }
  SpMat out(x.rows(), x.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

NamedParams init_parameters(const ModelConfig& cfg, std::int64_t in_dim, Rng& rng) {
  validate_config(cfg);
  NamedParams params;
  auto add = [&](const std::string& name, std::int64_t rows, std::int64_t cols) {
    params.emplace_back(name, glorot(rows, cols, rng));
  };

  switch (cfg.architecture) {
    case Architecture::GCN: {
      std::int64_t prev = in_dim;
      for (std::size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
        add("l" + std::to_string(l) + ".W", prev, cfg.hidden_dims[l]);
        prev = cfg.hidden_dims[l];
      }
      break;
    }
    case Architecture::GCNv2: {
      const std::int64_t width = cfg.hidden_dims[0];
      add("l0.W", in_dim, width);
      for (int l = 1; l <= cfg.propagation_layers; ++l) {
        add("l" + std::to_string(l) + ".W", width, width);
      }
      break;
    }
    case Architecture::GraphSAGE: {
      std::int64_t prev = in_dim;
      for (std::size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
        add("l" + std::to_string(l) + ".W_self", prev, cfg.hidden_dims[l]);
        add("l" + std::to_string(l) + ".W_neigh", prev, cfg.hidden_dims[l]);
        prev = cfg.hidden_dims[l];
      }
      break;
    }
    case Architecture::GAT: {
      std::int64_t prev = in_dim;
      for (std::size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
        const std::int64_t width = cfg.hidden_dims[l];
        for (int h = 0; h < cfg.heads[l]; ++h) {
          const std::string base = "l" + std::to_string(l) + ".h" + std::to_string(h) + ".";
          add(base + "W", prev, width);
          add(base + "a_dst", width, 1);
          add(base + "a_src", width, 1);
        }
        prev = width * cfg.heads[l];
      }
      break;
    }
    case Architecture::GATv2: {
      std::int64_t prev = in_dim;
      for (std::size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
        const std::int64_t width = cfg.hidden_dims[l];
        for (int h = 0; h < cfg.heads[l]; ++h) {
          const std::string base = "l" + std::to_string(l) + ".h" + std::to_string(h) + ".";
          add(base + "W_dst", prev, width);
          add(base + "W_src", prev, width);
          add(base + "a", width, 1);
        }
        prev = width * cfg.heads[l];
      }
      break;
    }
  }
  return params;
}

ad::Mat compute_embeddings(const ModelConfig& cfg, const NamedParams& params,
                           const ad::SpMat& features, const Graph& g_train) {
  const Operators ops = build_operators(cfg, g_train, features);
  return embed_with_ops(cfg, params, features, ops);
}

double decode(Eigen::Ref<const Eigen::VectorXd> z_u,
              Eigen::Ref<const Eigen::VectorXd> z_v) {
  if (z_u.size() != z_v.size()) {
    throw std::invalid_argument("decode: embedding dimensions disagree");
  }
  const double dot = z_u.dot(z_v);
  if (dot >= 0.0) return 1.0 / (1.0 + std::exp(-dot));
  const double e = std::exp(dot);
  return e / (1.0 + e);
}

double training_loss(const ModelConfig& cfg, const NamedParams& params,
                     const ad::SpMat& features, const Graph& g_train,
                     std::span<const NodePair> pairs, std::span<const int> labels,
                     NamedParams* gradients) {
  if (pairs.size() != labels.size()) {
    throw std::invalid_argument("training_loss: pairs/labels length mismatch");
  }
  const Operators ops = build_operators(cfg, g_train, features);
  Tape tape;
  std::vector<Var> ordered;
  const ParamVars vars = push_params(tape, params, gradients != nullptr, &ordered);
  const Var z = forward(tape, cfg, vars, features, ops, /*train_mode=*/false, 0);

  std::vector<std::int32_t> us;
  std::vector<std::int32_t> vs;
  Eigen::VectorXd y(static_cast<std::int64_t>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    us.push_back(pairs[k].first);
    vs.push_back(pairs[k].second);
    y(static_cast<std::int64_t>(k)) = labels[k];
  }
  const Var p = tape.sigmoid(
      tape.rowsum(tape.mul(tape.gather_rows(z, us), tape.gather_rows(z, vs))));
  const Var loss = tape.bce_loss(p, std::move(y));
  const double value = tape.value(loss)(0, 0);
  if (gradients) {
    tape.backward(loss);
    gradients->clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
      gradients->emplace_back(params[i].first, tape.grad(ordered[i]));
    }
  }
  return value;
}

TrainOutcome train_gnn(const ModelConfig& cfg, const ad::SpMat& features,
                       const LabeledPairSet& train_set, const Graph& g_train) {
  validate_config(cfg);
  if (features.rows() != g_train.num_nodes()) {
    throw std::invalid_argument("gnn: feature rows must match node count");
  }
  if (train_set.pairs.empty()) {
    throw std::invalid_argument("gnn: empty training set");
  }
  for (const auto& [u, v] : train_set.pairs) {
    if (u < 0 || v < 0 || u >= g_train.num_nodes() || v >= g_train.num_nodes()) {
      throw std::out_of_range("gnn: training pair references unknown node");
    }
  }

  Rng init_rng(Rng::derive(cfg.seed, "init"));
  NamedParams params = init_parameters(cfg, features.cols(), init_rng);
  const Operators ops = build_operators(cfg, g_train, features);

  // Early-stopping configs hold out a stratified validation slice.
  std::vector<std::size_t> fit_indices(train_set.size());
  std::iota(fit_indices.begin(), fit_indices.end(), std::size_t{0});
  std::vector<std::size_t> val_indices;
  if (cfg.early_stopping) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      (train_set.labels[i] == 1 ? pos : neg).push_back(i);
    }
    Rng val_rng(Rng::derive(cfg.seed, "validation"));
    val_rng.shuffle(pos);
    val_rng.shuffle(neg);
    const auto n_val_pos =
        static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(pos.size()));
    const auto n_val_neg =
        static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(neg.size()));
    if (n_val_pos > 0 && n_val_neg > 0) {
      val_indices.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_val_pos));
      val_indices.insert(val_indices.end(), neg.begin(),
                         neg.begin() + static_cast<std::ptrdiff_t>(n_val_neg));
      std::sort(val_indices.begin(), val_indices.end());
      fit_indices.clear();
      std::vector<bool> held(train_set.size(), false);
      for (const auto i : val_indices) held[i] = true;
      for (std::size_t i = 0; i < train_set.size(); ++i) {
        if (!held[i]) fit_indices.push_back(i);
      }
    }
  }
  const bool early_stop_active = !val_indices.empty();

  auto pair_columns = [&](const std::vector<std::size_t>& indices) {
    std::vector<std::int32_t> us;
    std::vector<std::int32_t> vs;
    Eigen::VectorXd y(static_cast<std::int64_t>(indices.size()));
    us.reserve(indices.size());
    vs.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      us.push_back(train_set.pairs[indices[k]].first);
      vs.push_back(train_set.pairs[indices[k]].second);
      y(static_cast<std::int64_t>(k)) = train_set.labels[indices[k]];
    }
    return std::tuple{std::move(us), std::move(vs), std::move(y)};
  };
  const auto [fit_u, fit_v, fit_y] = pair_columns(fit_indices);
  const auto [val_u, val_v, val_y] = pair_columns(val_indices);
  std::vector<int> val_labels;
  for (const auto i : val_indices) val_labels.push_back(train_set.labels[i]);

  ad::AdamState adam;
  std::vector<double> loss_curve;
  double best_val_auc = -1.0;
  NamedParams best_params;
  int patience_left = cfg.patience;
  int epochs_trained = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const std::uint64_t epoch_seed =
        Rng::derive(cfg.seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(epoch),
                    "epoch");

    Tape tape;
    std::vector<Var> ordered;
    const ParamVars vars = push_params(tape, params, /*requires_grad=*/true, &ordered);
    const Var z = forward(tape, cfg, vars, features, ops, /*train_mode=*/true, epoch_seed);
    const Var zu = tape.gather_rows(z, fit_u);
    const Var zv = tape.gather_rows(z, fit_v);
    const Var p = tape.sigmoid(tape.rowsum(tape.mul(zu, zv)));
    const Var loss = tape.bce_loss(p, fit_y);
    loss_curve.push_back(tape.value(loss)(0, 0));
    tape.backward(loss);

    std::vector<Mat*> param_ptrs;
    std::vector<const Mat*> grad_ptrs;
    param_ptrs.reserve(params.size());
    grad_ptrs.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      param_ptrs.push_back(&params[i].second);
      grad_ptrs.push_back(&tape.grad(ordered[i]));
    }
    adam_step(param_ptrs, grad_ptrs, adam, cfg.lr);
    epochs_trained = epoch;

    if (early_stop_active) {
      const Mat z_eval = embed_with_ops(cfg, params, features, ops);
      std::vector<double> val_probs(val_u.size());
      for (std::size_t k = 0; k < val_u.size(); ++k) {
        val_probs[k] = decode(z_eval.row(val_u[k]).transpose(),
                              z_eval.row(val_v[k]).transpose());
      }
      const double val_auc = auc(val_labels, val_probs);
      if (val_auc > best_val_auc + 1e-12) {
        best_val_auc = val_auc;
        best_params = params;
        patience_left = cfg.patience;
      } else if (--patience_left <= 0) {
        params = best_params;
        break;
      }
    }
  }
  if (early_stop_active && !best_params.empty()) {
    params = best_params;  // keep the best-validation parameters either way
  }

  TrainedModel model;
  model.config = cfg;
  model.parameters = std::move(params);
  model.norm_adjacency = ops.norm_adj;
  model.embeddings = embed_with_ops(cfg, model.parameters, features, ops);
  model.epochs_trained = epochs_trained;
  return {std::move(model), std::move(loss_curve)};
}

std::vector<double> predict_links(const TrainedModel& model,
                                  std::span<const NodePair> pairs) {
  const auto n = model.embeddings.rows();
  std::vector<double> probs;
  probs.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw std::out_of_range("predict_links: node index out of range");
    }
    probs.push_back(decode(model.embeddings.row(u).transpose(),
                           model.embeddings.row(v).transpose()));
  }
  return probs;
}

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model) {
  nlohmann::json header;
  header["format"] = "linkpred-checkpoint";
  header["architecture"] = architecture_name(model.config.architecture);
  header["seed"] = model.config.seed;
  header["config"] = config_to_json(model.config);
  header["epochs_trained"] = model.epochs_trained;
  header["parameters"] = nlohmann::json::array();
  for (const auto& [name, value] : model.parameters) {
    header["parameters"].push_back(
        {{"name", name}, {"rows", value.rows()}, {"cols", value.cols()}});
  }
  header["embeddings"] = {{"rows", model.embeddings.rows()},
                          {"cols", model.embeddings.cols()}};
  const std::string header_text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint64_t header_size = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_size), sizeof(header_size));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

  auto write_blob = [&out](const Mat& m) {
    for (std::int64_t i = 0; i < m.rows(); ++i) {
      for (std::int64_t j = 0; j < m.cols(); ++j) {
        const double x = m(i, j);
        out.write(reinterpret_cast<const char*>(&x), sizeof(x));
      }
    }
  };
  for (const auto& [name, value] : model.parameters) write_blob(value);
  write_blob(model.embeddings);
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), kCheckpointMagic)) {
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  }
  std::uint64_t header_size = 0;
  in.read(reinterpret_cast<char*>(&header_size), sizeof(header_size));
  std::string header_text(header_size, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path.string());
  const auto header = nlohmann::json::parse(header_text);

  TrainedModel model;
  model.config = config_from_json(header.at("config"));
  model.epochs_trained = header.at("epochs_trained").get<int>();

  auto read_blob = [&in, &path](std::int64_t rows, std::int64_t cols) {
    Mat m(rows, cols);
    for (std::int64_t i = 0; i < rows; ++i) {
      for (std::int64_t j = 0; j < cols; ++j) {
        double x = 0.0;
        in.read(reinterpret_cast<char*>(&x), sizeof(x));
        m(i, j) = x;
      }
    }
    if (!in) throw std::runtime_error("checkpoint: truncated blob in " + path.string());
    return m;
  };
  for (const auto& p : header.at("parameters")) {
    model.parameters.emplace_back(
        p.at("name").get<std::string>(),
        read_blob(p.at("rows").get<std::int64_t>(), p.at("cols").get<std::int64_t>()));
  }
  model.embeddings = read_blob(header.at("embeddings").at("rows").get<std::int64_t>(),
                               header.at("embeddings").at("cols").get<std::int64_t>());
  return model;
}

}  // namespace linkpred
