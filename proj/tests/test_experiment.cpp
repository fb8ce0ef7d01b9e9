#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "linkpred/experiment.hpp"
#include "linkpred/io.hpp"

using namespace linkpred;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ExperimentConfig small_sbm_config() {
  ExperimentConfig cfg;
  cfg.seed = 42;
  cfg.test_fraction = 0.2;
  SbmInput sbm;
  sbm.block_sizes = {16, 16};
  sbm.p_in = 0.5;
  sbm.p_out = 0.05;
  cfg.sbm = sbm;
  MethodSpec cn;
  cn.name = "common_neighbors";
  MethodSpec gcn;
  gcn.name = "gcn";
  gcn.max_epochs = 30;
  MethodSpec gcn_louvain = gcn;
  gcn_louvain.louvain = true;
  cfg.methods = {cn, gcn, gcn_louvain};
  return cfg;
}

// Small dims keep the harness tests fast; overrides flow through the config.
void shrink_gnn(ExperimentConfig& cfg) {
  for (auto& m : cfg.methods) {
    if (m.name == "gcn" || m.name == "graphsage" || m.name == "gat" ||
        m.name == "gatv2" || m.name == "gcnv2") {
      m.max_epochs = m.max_epochs.value_or(30);
    }
  }
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config json round trip") {
  ExperimentConfig cfg = small_sbm_config();
  cfg.methods[0].threshold = 2.0;
  cfg.methods[1].lr = 0.02;
  cfg.dump_communities = true;
  cfg.output_dir = "results";
  const std::string text = cfg.to_json_text();
  const ExperimentConfig parsed = ExperimentConfig::from_json_text(text);
  CHECK(parsed == cfg);
}

TEST_CASE("config defaults and shorthand methods") {
  const auto cfg = ExperimentConfig::from_json_text(R"({
    "input": {"sbm": {"block_sizes": [8, 8], "p_in": 0.5, "p_out": 0.1}},
    "methods": ["random", "jaccard", {"name": "gcn", "louvain": true}]
  })");
  CHECK(cfg.seed == 42);
  CHECK(cfg.test_fraction == 0.2);
  CHECK(cfg.methods.size() == 3);
  CHECK(cfg.methods[0].name == "random");
  CHECK(cfg.methods[2].louvain);
}

TEST_CASE("config validation") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(R"({"methods": []})"),
                       doctest::Contains("[config]"), std::runtime_error);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(R"({
      "input": {"sbm": {"block_sizes": [4], "p_in": 1, "p_out": 0}},
      "methods": ["nonsense"]})"),
                       doctest::Contains("unknown method"), std::runtime_error);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(R"({
      "input": {"sbm": {"block_sizes": [4], "p_in": 1, "p_out": 0}},
      "methods": [{"name": "jaccard", "louvain": true}]})"),
                       doctest::Contains("community features"), std::runtime_error);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(R"({
      "methods": ["jaccard"]})"),
                       doctest::Contains("exactly one input"), std::runtime_error);
}

TEST_CASE("run_experiment produces one row per method on a shared split") {
  ExperimentConfig cfg = small_sbm_config();
  shrink_gnn(cfg);
  const ExperimentReport report = run_experiment(cfg);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].name == "common_neighbors");
  CHECK(report.rows[1].name == "gcn");
  CHECK(report.rows[2].name == "gcn+louvain");
  CHECK(report.test_set_hash != 0);
  CHECK(report.community_count >= 1);
  CHECK(report.feature_source == "train_adjacency");
  CHECK(report.augmented_cols == report.feature_cols + report.community_count);
  for (const auto& row : report.rows) {
    CHECK(row.cm.total() == static_cast<std::int64_t>(report.test_samples));
    CHECK(row.auc_value > 0.0);
  }
  CHECK(report.rows[1].loss_curve.size() ==
        static_cast<std::size_t>(report.rows[1].epochs_trained));
}

TEST_CASE("emit_report writes the expected files and replays byte-identically") {
  ExperimentConfig cfg = small_sbm_config();
  shrink_gnn(cfg);
  cfg.dump_communities = true;
  cfg.save_split = true;

  const auto dir_a = std::filesystem::temp_directory_path() / "linkpred_exp_a";
  const auto dir_b = std::filesystem::temp_directory_path() / "linkpred_exp_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);

  emit_report(run_experiment(cfg), dir_a);
  emit_report(run_experiment(cfg), dir_b);

  for (const char* file : {"metrics.csv", "manifest.json", "confusion_gcn.csv",
                           "loss_gcn.csv", "communities.csv", "split.csv",
                           "confusion_common_neighbors.csv", "loss_gcn_louvain.csv"}) {
    CAPTURE(file);
    CHECK(std::filesystem::exists(dir_a / file));
  }
  CHECK(read_file(dir_a / "metrics.csv") == read_file(dir_b / "metrics.csv"));

  const std::string metrics = read_file(dir_a / "metrics.csv");
  CHECK(metrics.starts_with("method,precision,recall,f1,auc\n"));
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 4);  // header + 3 rows

  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("manifest config echo round-trips to an equal config") {
  ExperimentConfig cfg = small_sbm_config();
  shrink_gnn(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "linkpred_exp_manifest";
  std::filesystem::remove_all(dir);
  emit_report(run_experiment(cfg), dir);

  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  const ExperimentConfig echoed =
      ExperimentConfig::from_json_text(manifest.at("config").dump());
  CHECK(echoed == cfg);
  std::filesystem::remove_all(dir);
}

TEST_CASE("not-implemented baselines keep their table rows") {
  ExperimentConfig cfg;
  SbmInput sbm;
  sbm.block_sizes = {10, 10};
  sbm.p_in = 0.6;
  sbm.p_out = 0.1;
  cfg.sbm = sbm;
  MethodSpec rf;
  rf.name = "random_forest";
  MethodSpec xgb;
  xgb.name = "xgboost";
  MethodSpec cn;
  cn.name = "common_neighbors";
  cfg.methods = {cn, rf, xgb};

  const auto dir = std::filesystem::temp_directory_path() / "linkpred_exp_ni";
  std::filesystem::remove_all(dir);
  const ExperimentReport report = run_experiment(cfg);
  CHECK(report.rows[1].not_implemented);
  emit_report(report, dir);
  const std::string metrics = read_file(dir / "metrics.csv");
  CHECK(metrics.find("random_forest,NA,NA,NA,NA") != std::string::npos);
  CHECK(metrics.find("xgboost,NA,NA,NA,NA") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "confusion_random_forest.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv input with attributes flows through the feature pipeline") {
  const auto dir = std::filesystem::temp_directory_path() / "linkpred_exp_csv";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream edges(dir / "edges.csv");
    edges << "source,target\n";
    // two clusters with attribute signal
    edges << "a0,a1\na0,a2\na1,a2\na1,a3\na2,a3\na0,a3\n";
    edges << "b0,b1\nb0,b2\nb1,b2\nb1,b3\nb2,b3\nb0,b3\n";
    edges << "a0,b0\n";
  }
  {
    std::ofstream nodes(dir / "nodes.tsv");
    nodes << "id\tgroup\tblurb\n";
    for (const char* id : {"a0", "a1", "a2", "a3"}) {
      nodes << id << "\talpha\tzinc anode paper\n";
    }
    for (const char* id : {"b0", "b1", "b2", "b3"}) {
      nodes << id << "\tbeta\tsodium cathode paper\n";
    }
  }
  {
    std::ofstream schema(dir / "schema.json");
    schema << R"({"group": "categorical", "blurb": "text"})";
  }

  ExperimentConfig cfg;
  cfg.edges_csv = (dir / "edges.csv").string();
  cfg.nodes_tsv = (dir / "nodes.tsv").string();
  cfg.schema_json = (dir / "schema.json").string();
  cfg.test_fraction = 0.25;
  MethodSpec lr;
  lr.name = "logreg";
  lr.epochs = 200;
  cfg.methods = {lr};

  const ExperimentReport report = run_experiment(cfg);
  CHECK(report.feature_source == "node_table");
  CHECK(report.feature_cols > 2);
  CHECK(report.rows[0].auc_value >= 0.0);

  // the fitted pipeline is persisted for exact replay
  const auto out = dir / "report";
  emit_report(report, out);
  REQUIRE(std::filesystem::exists(out / "feature_pipeline.json"));
  const FeaturePipeline restored =
      FeaturePipeline::from_manifest_json(read_file(out / "feature_pipeline.json"));
  CHECK(restored.categorical.size() == 1);
  CHECK(restored.text.size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("persisted split replays to identical heuristic rows") {
  ExperimentConfig cfg = small_sbm_config();
  cfg.methods.resize(1);  // common_neighbors only
  cfg.save_split = true;
  const auto dir = std::filesystem::temp_directory_path() / "linkpred_exp_replay";
  std::filesystem::remove_all(dir);
  emit_report(run_experiment(cfg), dir);

  // regenerate the same SBM graph, but replay the persisted split
  ExperimentConfig replay = cfg;
  replay.save_split = false;
  replay.split_csv = (dir / "split.csv").string();
  const auto dir2 = dir / "replayed";
  emit_report(run_experiment(replay), dir2);

  const std::string a = read_file(dir / "metrics.csv");
  const std::string b = read_file(dir2 / "metrics.csv");
  CHECK(a == b);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
