#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "linkpred/gnn.hpp"
#include "linkpred/metrics.hpp"
#include "linkpred/sbm.hpp"

namespace linkpred {

// One requested method row. Heuristics take a threshold override; model
// methods take hyperparameter overrides; `louvain` asks for community
// one-hot feature augmentation (logreg and GNN methods only).
struct MethodSpec {
  std::string name;
  bool louvain = false;
  std::optional<double> threshold;
  std::optional<double> lr;
  std::optional<double> dropout;
  std::optional<double> alpha;
  std::optional<double> theta;
  std::optional<double> l2;
  std::optional<int> max_epochs;
  std::optional<int> patience;
  std::optional<int> epochs;  // logreg

  std::string display_name() const;  // e.g. "gcn+louvain"
  std::string slug() const;          // filesystem-safe, e.g. "gcn_louvain"

  bool operator==(const MethodSpec&) const = default;
};

struct SbmInput {
  std::vector<std::int32_t> block_sizes;
  double p_in = 0.0;
  double p_out = 0.0;

  bool operator==(const SbmInput&) const = default;
};

// A whole experiment in one JSON document; `seed` defaults to 42.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  double test_fraction = 0.2;

  // Input is either an SBM spec or an edge CSV (with optional node
  // attribute TSV + JSON schema); a persisted split CSV replays an
  // earlier sampling exactly.
  std::optional<SbmInput> sbm;
  std::string edges_csv;
  std::string nodes_tsv;
  std::string schema_json;
  std::string split_csv;

  std::vector<MethodSpec> methods;

  std::size_t max_vocab = 0;
  double louvain_min_gain = 1e-7;
  bool dump_communities = false;
  bool save_checkpoints = false;
  bool save_split = false;
  std::string output_dir = "out";

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json_text() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct MethodResult {
  std::string name;   // display name, e.g. "gcn+louvain"
  std::string slug;
  bool not_implemented = false;
  ClassificationScores scores;
  double auc_value = 0.0;
  std::string auc_source;  // raw_scores | thresholded_labels | probabilities
  std::optional<double> auc_on_labels;  // secondary AUC for heuristics
  ConfusionMatrix cm;
  std::vector<double> loss_curve;
  int epochs_trained = 0;
  double seconds = 0.0;
  std::optional<TrainedModel> model;  // kept when checkpoints are requested
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MethodResult> rows;

  std::int64_t n_nodes = 0;
  std::int64_t n_edges = 0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::string feature_source;  // node_table | identity
  std::int64_t feature_cols = 0;
  std::int64_t augmented_cols = 0;      // 0 when no method asked for louvain
  std::int32_t community_count = 0;     // k of the train-graph partition
  double louvain_modularity = 0.0;
  std::uint64_t test_set_hash = 0;
  double total_seconds = 0.0;

  // carried for the optional on-disk artifacts
  std::vector<std::string> external_ids;
  std::optional<Partition> partition;
  std::optional<Datasets> datasets;
  std::string feature_manifest;  // fitted-pipeline JSON when a node table was used
};

// Runs every requested method against one shared split (all methods see
// the identical test pairs). Errors carry a [stage] tag: config, ingest,
// split, feature, train, eval or report.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Writes metrics.csv, confusion_<method>.csv, loss_<method>.csv and
// manifest.json (plus optional split/community/checkpoint files).
void emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

// LINKPRED_THREADS cap (defaults to the hardware concurrency).
unsigned experiment_thread_cap();

}  // namespace linkpred
