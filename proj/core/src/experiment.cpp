#include "linkpred/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "linkpred/heuristics.hpp"
#include "linkpred/io.hpp"
#include "linkpred/logreg.hpp"
#include "linkpred/louvain.hpp"

namespace linkpred {
namespace {

using nlohmann::json;

const std::unordered_set<std::string> kHeuristicNames = {
    "random", "common_neighbors", "jaccard", "adamic_adar", "resource_allocation"};
const std::unordered_set<std::string> kModelNames = {"logreg", "gat", "gatv2", "gcn",
                                                     "gcnv2", "graphsage"};
const std::unordered_set<std::string> kUnimplementedNames = {"random_forest", "xgboost"};

HeuristicKind heuristic_kind(const std::string& name) {
  if (name == "random") return HeuristicKind::Random;
  if (name == "common_neighbors") return HeuristicKind::CommonNeighbors;
  if (name == "jaccard") return HeuristicKind::Jaccard;
  if (name == "adamic_adar") return HeuristicKind::AdamicAdar;
  return HeuristicKind::ResourceAllocation;
}

[[noreturn]] void fail_stage(const std::string& stage, const std::string& message) {
  throw std::runtime_error("[" + stage + "] " + message);
}

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    const std::string what = e.what();
    if (!what.empty() && what.front() == '[') throw;  // already tagged
    fail_stage(name, what);
  }
}

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::uint64_t hash_pair_set(const LabeledPairSet& set) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 0x100000001b3ull;
  };
  for (std::size_t i = 0; i < set.size(); ++i) {
    mix(pair_key(set.pairs[i].first, set.pairs[i].second));
    mix(static_cast<std::uint64_t>(set.labels[i]));
  }
  return h;
}

// Everything the per-method workers share, immutable once built.
struct PipelineData {
  Graph graph;
  NodeTable table;
  Datasets data;
  Graph train_graph;
  std::string feature_source;
  std::string feature_manifest;
  FeatureMatrix features;      // plain
  FeatureMatrix features_aug;  // with community block, when requested
  ad::SpMat x_plain;
  ad::SpMat x_aug;
  Partition partition;
  bool has_features = false;
  bool has_partition = false;
  double louvain_modularity = 0.0;
};

MethodResult run_heuristic(const MethodSpec& spec, const PipelineData& pipe,
                           std::uint64_t seed) {
  const HeuristicKind kind = heuristic_kind(spec.name);
  HeuristicMethod method = HeuristicMethod::with_defaults(kind);
  if (spec.threshold) method.threshold = *spec.threshold;

  const auto& test = pipe.data.test;
  MethodResult result;
  const auto labels = heuristic_predict(pipe.train_graph, method, test.pairs,
                                        Rng::derive(seed, "random-baseline"));
  result.cm = confusion(test.labels, labels);
  result.scores = classification_metrics(result.cm);

  if (kind == HeuristicKind::Random) {
    std::vector<double> as_scores(labels.begin(), labels.end());
    result.auc_value = auc(test.labels, as_scores);
    result.auc_source = "thresholded_labels";
  } else {
    std::vector<double> raw;
    raw.reserve(test.size());
    for (const auto& [u, v] : test.pairs) {
      raw.push_back(heuristic_score(pipe.train_graph, kind, u, v));
    }
    result.auc_value = auc(test.labels, raw);
    result.auc_source = "raw_scores";
    std::vector<double> as_scores(labels.begin(), labels.end());
    result.auc_on_labels = auc(test.labels, as_scores);
  }
  return result;
}

MethodResult run_logreg(const MethodSpec& spec, const PipelineData& pipe,
                        std::uint64_t seed) {
  const auto& x = spec.louvain ? pipe.features_aug : pipe.features;
  const auto train_x = build_pair_features(x, pipe.data.train.pairs);
  const auto test_x = build_pair_features(x, pipe.data.test.pairs);

  LogregOptions options;
  options.lr = spec.lr.value_or(options.lr);
  options.epochs = spec.epochs.value_or(options.epochs);
  options.l2 = spec.l2.value_or(options.l2);
  options.seed = Rng::derive(seed, spec.slug());

  auto fit = fit_logreg(train_x, pipe.data.train.labels, options);
  const auto prediction =
      predict_logreg(fit.model, test_x, spec.threshold.value_or(0.5));

  MethodResult result;
  result.cm = confusion(pipe.data.test.labels, prediction.labels);
  result.scores = classification_metrics(result.cm);
  result.auc_value = auc(pipe.data.test.labels, prediction.probabilities);
  result.auc_source = "probabilities";
  result.loss_curve = std::move(fit.loss_curve);
  result.epochs_trained = options.epochs;
  return result;
}

MethodResult run_gnn(const MethodSpec& spec, const PipelineData& pipe,
                     std::uint64_t seed, bool keep_model) {
  ModelConfig cfg = ModelConfig::defaults(architecture_from_name(spec.name));
  cfg.lr = spec.lr.value_or(cfg.lr);
  cfg.dropout = spec.dropout.value_or(cfg.dropout);
  cfg.max_epochs = spec.max_epochs.value_or(cfg.max_epochs);
  cfg.patience = spec.patience.value_or(cfg.patience);
  cfg.alpha = spec.alpha.value_or(cfg.alpha);
  cfg.theta = spec.theta.value_or(cfg.theta);
  cfg.seed = Rng::derive(seed, spec.slug());

  const ad::SpMat& x = spec.louvain ? pipe.x_aug : pipe.x_plain;
  auto outcome = train_gnn(cfg, x, pipe.data.train, pipe.train_graph);

  const auto probs = predict_links(outcome.model, pipe.data.test.pairs);
  std::vector<int> labels;
  labels.reserve(probs.size());
  for (const double p : probs) labels.push_back(p >= 0.5 ? 1 : 0);

  MethodResult result;
  result.cm = confusion(pipe.data.test.labels, labels);
  result.scores = classification_metrics(result.cm);
  result.auc_value = auc(pipe.data.test.labels, probs);
  result.auc_source = "probabilities";
  result.loss_curve = std::move(outcome.loss_curve);
  result.epochs_trained = outcome.model.epochs_trained;
  if (keep_model) result.model = std::move(outcome.model);
  return result;
}

json method_to_json(const MethodSpec& m) {
  json j;
  j["name"] = m.name;
  if (m.louvain) j["louvain"] = true;
  if (m.threshold) j["threshold"] = *m.threshold;
  if (m.lr) j["lr"] = *m.lr;
  if (m.dropout) j["dropout"] = *m.dropout;
  if (m.alpha) j["alpha"] = *m.alpha;
  if (m.theta) j["theta"] = *m.theta;
  if (m.l2) j["l2"] = *m.l2;
  if (m.max_epochs) j["max_epochs"] = *m.max_epochs;
  if (m.patience) j["patience"] = *m.patience;
  if (m.epochs) j["epochs"] = *m.epochs;
  return j;
}

MethodSpec method_from_json(const json& j) {
  MethodSpec m;
  if (j.is_string()) {
    m.name = j.get<std::string>();
    return m;
  }
  // "method" is accepted as an alias of "name"
  m.name = j.contains("method") ? j.at("method").get<std::string>()
                                : j.at("name").get<std::string>();
  m.louvain = j.value("louvain", false);
  auto opt_double = [&j](const char* key) -> std::optional<double> {
    if (j.contains(key)) return j.at(key).get<double>();
    return std::nullopt;
  };
  auto opt_int = [&j](const char* key) -> std::optional<int> {
    if (j.contains(key)) return j.at(key).get<int>();
    return std::nullopt;
  };
  m.threshold = opt_double("threshold");
  m.lr = opt_double("lr");
  m.dropout = opt_double("dropout");
  m.alpha = opt_double("alpha");
  m.theta = opt_double("theta");
  m.l2 = opt_double("l2");
  m.max_epochs = opt_int("max_epochs");
  m.patience = opt_int("patience");
  m.epochs = opt_int("epochs");
  return m;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) fail_stage("config", "method list is empty");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    fail_stage("config", "test_fraction must lie in (0,1)");
  }
  const bool has_files = !cfg.edges_csv.empty();
  if (cfg.sbm.has_value() == has_files) {
    fail_stage("config", "exactly one input is required: an SBM spec or an edge CSV");
  }
  if (!cfg.nodes_tsv.empty() && cfg.schema_json.empty()) {
    fail_stage("config", "nodes_tsv requires schema_json");
  }
  for (const auto& m : cfg.methods) {
    const bool known = kHeuristicNames.contains(m.name) || kModelNames.contains(m.name) ||
                       kUnimplementedNames.contains(m.name);
    if (!known) fail_stage("config", "unknown method '" + m.name + "'");
    if (m.louvain && !kModelNames.contains(m.name)) {
      fail_stage("config", "method '" + m.name + "' cannot take community features");
    }
  }
  std::unordered_set<std::string> slugs;
  for (const auto& m : cfg.methods) {
    if (!slugs.insert(m.slug()).second) {
      fail_stage("config", "duplicate method entry '" + m.display_name() + "'");
    }
  }
}

}  // namespace

std::string MethodSpec::display_name() const {
  return louvain ? name + "+louvain" : name;
}

std::string MethodSpec::slug() const {
  return louvain ? name + "_louvain" : name;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail_stage("config", std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.test_fraction = j.value("test_fraction", 0.2);
    if (j.contains("input")) {
      const auto& input = j.at("input");
      if (input.contains("sbm")) {
        SbmInput sbm;
        sbm.block_sizes = input.at("sbm").at("block_sizes").get<std::vector<std::int32_t>>();
        sbm.p_in = input.at("sbm").at("p_in").get<double>();
        sbm.p_out = input.at("sbm").at("p_out").get<double>();
        cfg.sbm = sbm;
      }
      cfg.edges_csv = input.value("edges_csv", "");
      cfg.nodes_tsv = input.value("nodes_tsv", "");
      cfg.schema_json = input.value("schema_json", "");
      cfg.split_csv = input.value("split_csv", "");
    }
    for (const auto& m : j.value("methods", json::array())) {
      cfg.methods.push_back(method_from_json(m));
    }
    cfg.max_vocab = j.value("max_vocab", std::size_t{0});
    cfg.louvain_min_gain = j.value("louvain_min_gain", 1e-7);
    cfg.dump_communities = j.value("dump_communities", false);
    cfg.save_checkpoints = j.value("save_checkpoints", false);
    cfg.save_split = j.value("save_split", false);
    cfg.output_dir = j.value("output_dir", "out");
  } catch (const std::exception& e) {
    const std::string what = e.what();
    if (!what.empty() && what.front() == '[') throw;
    fail_stage("config", what);
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_stage("config", "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["test_fraction"] = test_fraction;
  json input;
  if (sbm) {
    input["sbm"] = {{"block_sizes", sbm->block_sizes},
                    {"p_in", sbm->p_in},
                    {"p_out", sbm->p_out}};
  }
  if (!edges_csv.empty()) input["edges_csv"] = edges_csv;
  if (!nodes_tsv.empty()) input["nodes_tsv"] = nodes_tsv;
  if (!schema_json.empty()) input["schema_json"] = schema_json;
  if (!split_csv.empty()) input["split_csv"] = split_csv;
  j["input"] = input;
  j["methods"] = json::array();
  for (const auto& m : methods) j["methods"].push_back(method_to_json(m));
  j["max_vocab"] = max_vocab;
  j["louvain_min_gain"] = louvain_min_gain;
  j["dump_communities"] = dump_communities;
  j["save_checkpoints"] = save_checkpoints;
  j["save_split"] = save_split;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

unsigned experiment_thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LINKPRED_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) cap = static_cast<unsigned>(parsed);
  }
  return cap;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  validate_config(config);

  PipelineData pipe;
  ExperimentReport report;
  report.config = config;

  stage("ingest", [&] {
    if (config.sbm) {
      BlockModelSpec spec;
      spec.block_sizes = config.sbm->block_sizes;
      spec.p_in = config.sbm->p_in;
      spec.p_out = config.sbm->p_out;
      spec.seed = Rng::derive(config.seed, "sbm");
      auto [graph, truth] = generate_sbm(spec);
      pipe.graph = std::move(graph);
      for (NodeId u = 0; u < pipe.graph.num_nodes(); ++u) {
        pipe.table.intern(std::to_string(u));
      }
    } else {
      if (!config.nodes_tsv.empty()) {
        pipe.table = read_node_table(config.nodes_tsv, config.schema_json);
      }
      pipe.graph = graph_from_string_edges(read_edge_csv(config.edges_csv), pipe.table);
    }
  });

  stage("split", [&] {
    if (!config.split_csv.empty()) {
      pipe.data = read_split_csv(config.split_csv, pipe.table);
    } else {
      pipe.data = build_datasets(pipe.graph, config.test_fraction, config.seed);
    }
    pipe.train_graph = [&] {
      std::vector<NodePair> train_edges;
      for (std::size_t i = 0; i < pipe.data.train.size(); ++i) {
        if (pipe.data.train.labels[i] == 1) train_edges.push_back(pipe.data.train.pairs[i]);
      }
      return Graph::from_edges(train_edges, pipe.graph.num_nodes());
    }();
  });

  const bool needs_features = std::any_of(
      config.methods.begin(), config.methods.end(),
      [](const MethodSpec& m) { return kModelNames.contains(m.name); });
  const bool needs_louvain = std::any_of(config.methods.begin(), config.methods.end(),
                                         [](const MethodSpec& m) { return m.louvain; });

  stage("feature", [&] {
    if (!needs_features) return;
    if (pipe.table.columns.empty()) {
      // Attribute-less input: use normalized train-adjacency rows as node
      // features. Nodes with similar neighborhoods share weights, unlike
      // identity features whose per-node columns just memorize the split.
      pipe.features = adjacency_features(pipe.train_graph);
      pipe.feature_source = "train_adjacency";
    } else {
      const FeaturePipeline pipeline = FeaturePipeline::fit(pipe.table, config.max_vocab);
      pipe.features = pipeline.transform(pipe.table);
      pipe.feature_source = "node_table";
      pipe.feature_manifest = pipeline.to_manifest_json();
    }
    pipe.x_plain = to_sparse(pipe.features);
    pipe.has_features = true;

    if (needs_louvain) {
      pipe.partition = louvain(pipe.train_graph, config.louvain_min_gain,
                               Rng::derive(config.seed, "louvain"));
      pipe.louvain_modularity = modularity(pipe.train_graph, pipe.partition);
      pipe.features_aug = augment_with_communities(pipe.features, pipe.partition);
      pipe.x_aug = to_sparse(pipe.features_aug);
      pipe.has_partition = true;
    }
  });

  report.rows.resize(config.methods.size());
  std::vector<std::exception_ptr> failures(config.methods.size());
  std::atomic<std::size_t> cursor{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= config.methods.size()) return;
      const MethodSpec& spec = config.methods[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        MethodResult result;
        if (kUnimplementedNames.contains(spec.name)) {
          result.not_implemented = true;
        } else if (kHeuristicNames.contains(spec.name)) {
          result = run_heuristic(spec, pipe, config.seed);
        } else if (spec.name == "logreg") {
          result = run_logreg(spec, pipe, config.seed);
        } else {
          result = run_gnn(spec, pipe, config.seed, config.save_checkpoints);
        }
        result.name = spec.display_name();
        result.slug = spec.slug();
        result.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.rows[i] = std::move(result);
      } catch (const std::exception& e) {
        const std::string what = e.what();
        const std::string tagged = (!what.empty() && what.front() == '[')
                                       ? what
                                       : "[train] " + spec.display_name() + ": " + what;
        failures[i] = std::make_exception_ptr(std::runtime_error(tagged));
      }
    }
  };

  const unsigned n_threads =
      std::min<unsigned>(experiment_thread_cap(),
                         static_cast<unsigned>(config.methods.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  report.n_nodes = pipe.graph.num_nodes();
  report.n_edges = pipe.graph.num_edges();
  report.train_samples = pipe.data.train.size();
  report.test_samples = pipe.data.test.size();
  report.feature_source = pipe.feature_source;
  report.feature_cols = pipe.has_features ? pipe.features.cols() : 0;
  report.augmented_cols = pipe.has_partition ? pipe.features_aug.cols() : 0;
  report.community_count = pipe.has_partition ? pipe.partition.k : 0;
  report.louvain_modularity = pipe.has_partition ? pipe.louvain_modularity : 0.0;
  report.test_set_hash = hash_pair_set(pipe.data.test);
  report.external_ids = pipe.table.external_ids;
  report.feature_manifest = pipe.feature_manifest;
  if (pipe.has_partition) report.partition = pipe.partition;
  if (config.save_split) report.datasets = pipe.data;
  report.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  stage("report", [&] {
    std::filesystem::create_directories(out_dir);

    {
      std::ofstream metrics(out_dir / "metrics.csv");
      if (!metrics) throw std::runtime_error("cannot write metrics.csv");
      metrics << "method,precision,recall,f1,auc\n";
      for (const auto& row : report.rows) {
        if (row.not_implemented) {
          metrics << row.name << ",NA,NA,NA,NA\n";
        } else {
          metrics << row.name << ',' << fmt6(row.scores.precision) << ','
                  << fmt6(row.scores.recall) << ',' << fmt6(row.scores.f1) << ','
                  << fmt6(row.auc_value) << '\n';
        }
      }
    }

    for (const auto& row : report.rows) {
      if (row.not_implemented) continue;
      {
        std::ofstream cm(out_dir / ("confusion_" + row.slug + ".csv"));
        cm << "tp,fp,tn,fn\n"
           << row.cm.tp << ',' << row.cm.fp << ',' << row.cm.tn << ',' << row.cm.fn << '\n';
      }
      if (!row.loss_curve.empty()) {
        std::ofstream loss(out_dir / ("loss_" + row.slug + ".csv"));
        loss << "epoch,loss\n";
        for (std::size_t e = 0; e < row.loss_curve.size(); ++e) {
          loss << (e + 1) << ',' << fmt6(row.loss_curve[e]) << '\n';
        }
      }
      if (row.model) {
        save_checkpoint(out_dir / (row.slug + ".ckpt"), *row.model);
      }
    }

    if (report.partition && report.config.dump_communities) {
      NodeTable table;
      for (const auto& id : report.external_ids) table.intern(id);
      write_communities_csv(out_dir / "communities.csv", *report.partition, table);
    }
    if (report.datasets) {
      NodeTable table;
      for (const auto& id : report.external_ids) table.intern(id);
      write_split_csv(out_dir / "split.csv", *report.datasets, table);
    }
    if (!report.feature_manifest.empty()) {
      std::ofstream out(out_dir / "feature_pipeline.json");
      if (!out) throw std::runtime_error("cannot write feature_pipeline.json");
      out << report.feature_manifest << '\n';
    }

    json manifest;
    manifest["config"] = json::parse(report.config.to_json_text());
    manifest["dataset"] = {{"nodes", report.n_nodes},
                           {"edges", report.n_edges},
                           {"train_samples", report.train_samples},
                           {"test_samples", report.test_samples}};
    manifest["features"] = {{"source", report.feature_source},
                            {"columns", report.feature_cols},
                            {"augmented_columns", report.augmented_cols}};
    manifest["louvain"] = {{"communities", report.community_count},
                           {"train_graph_modularity", report.louvain_modularity}};
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(report.test_set_hash));
    manifest["test_set_hash"] = hash_hex;
    manifest["total_seconds"] = report.total_seconds;
    manifest["methods"] = json::array();
    for (const auto& row : report.rows) {
      json m = {{"name", row.name},
                {"slug", row.slug},
                {"seconds", row.seconds},
                {"not_implemented", row.not_implemented}};
      if (!row.not_implemented) {
        m["auc_source"] = row.auc_source;
        m["epochs_trained"] = row.epochs_trained;
        if (row.auc_on_labels) m["auc_on_thresholded_labels"] = *row.auc_on_labels;
      }
      manifest["methods"].push_back(m);
    }
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << manifest.dump(2) << '\n';
  });
}

}  // namespace linkpred
