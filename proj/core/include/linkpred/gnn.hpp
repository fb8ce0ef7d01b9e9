#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linkpred/autodiff.hpp"
#include "linkpred/features.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/rng.hpp"
#include "linkpred/sampler.hpp"

namespace linkpred {

enum class Architecture { GAT, GATv2, GCN, GCNv2, GraphSAGE };

std::string architecture_name(Architecture arch);
Architecture architecture_from_name(std::string_view name);

// Hyperparameters for one architecture. defaults() encodes the tuned
// configurations: GAT in->64x4 heads->16 (dropout 0.6, lr 0.01, 300
// epochs), GATv2 in->64x4->48 (lr 0.02, early stopping), GCN and
// GraphSAGE in->512->128->32 (dropout 0.5, lr 0.01, 300 epochs), GCNv2
// linear->48 with 3 propagation layers (alpha 0.3, theta 0.7, lr 0.02,
// early stopping).
struct ModelConfig {
  Architecture architecture = Architecture::GCN;
  std::vector<std::int64_t> hidden_dims;
  std::vector<int> heads;
  double dropout = 0.5;
  double lr = 0.01;
  int max_epochs = 300;
  bool early_stopping = false;
  int patience = 20;
  double validation_fraction = 0.10;
  double alpha = 0.3;          // GCNv2 initial-residual mix
  double theta = 0.7;          // GCNv2 identity-mapping schedule
  int propagation_layers = 3;  // GCNv2
  double leaky_slope = 0.2;    // attention scoring
  std::uint64_t seed = 42;

  static ModelConfig defaults(Architecture arch);
  bool operator==(const ModelConfig&) const = default;
};

// --- graph operators ------------------------------------------------------

// A_hat = D~^(-1/2) (A + I) D~^(-1/2); an isolated node keeps a unit
// self-loop entry.
ad::SpMat normalized_adjacency(const Graph& g);

// Row-stochastic neighbor mean D^(-1) A; rows of isolated nodes are zero.
ad::SpMat mean_adjacency(const Graph& g);

// Directed message edges including self-loops, grouped by destination.
struct AttentionEdges {
  std::vector<std::int32_t> dst;
  std::vector<std::int32_t> src;
};
AttentionEdges attention_edges(const Graph& g);

ad::SpMat to_sparse(const FeatureMatrix& x);

// Rows of the normalized adjacency as a feature matrix: the standard
// fallback input for graphs without node attributes.
FeatureMatrix adjacency_features(const Graph& g);

// Identity-mapping strength of GCNv2 layer l (1-based): ln(theta/l + 1).
double gcn2_layer_beta(double theta, int layer);

// --- model ----------------------------------------------------------------

using NamedParams = std::vector<std::pair<std::string, ad::Mat>>;

// Glorot-uniform parameter tensors for the architecture, seeded.
NamedParams init_parameters(const ModelConfig& cfg, std::int64_t in_dim, Rng& rng);

// Eval-mode node embeddings for a parameter set (dropout disabled): a pure
// function of (parameters, features, train graph).
ad::Mat compute_embeddings(const ModelConfig& cfg, const NamedParams& params,
                           const ad::SpMat& features, const Graph& g_train);

// sigmoid(z_u . z_v); symmetric in its arguments.
double decode(Eigen::Ref<const Eigen::VectorXd> z_u,
              Eigen::Ref<const Eigen::VectorXd> z_v);

// BCE of the decoded pair probabilities at `params` with dropout disabled.
// When `gradients` is non-null it receives d loss / d param for every
// parameter (same names and order); this is the hook the gradient-check
// suites drive.
double training_loss(const ModelConfig& cfg, const NamedParams& params,
                     const ad::SpMat& features, const Graph& g_train,
                     std::span<const NodePair> pairs, std::span<const int> labels,
                     NamedParams* gradients = nullptr);

struct TrainedModel {
  ModelConfig config;
  NamedParams parameters;
  ad::SpMat norm_adjacency;  // train-edge propagation operator
  ad::Mat embeddings;        // cached eval-mode forward
  int epochs_trained = 0;
};

struct TrainOutcome {
  TrainedModel model;
  std::vector<double> loss_curve;  // one entry per trained epoch
};

// Full-batch Adam on BCE over the labeled train pairs, message passing on
// train edges only. Early-stopping configs hold out a validation slice of
// the train pairs and stop on stalled validation AUC (best parameters are
// restored). Deterministic per cfg.seed.
TrainOutcome train_gnn(const ModelConfig& cfg, const ad::SpMat& features,
                       const LabeledPairSet& train_set, const Graph& g_train);

// Decoded probabilities over cached embeddings.
std::vector<double> predict_links(const TrainedModel& model,
                                  std::span<const NodePair> pairs);

// Portable JSON-header + raw little-endian float64 blob container.
void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace linkpred
