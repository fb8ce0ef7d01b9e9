// Command-line entry point: experiment runner plus the synthetic-graph and
// split utilities.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "linkpred/experiment.hpp"
#include "linkpred/io.hpp"
#include "linkpred/sbm.hpp"

namespace {

std::vector<std::int32_t> parse_blocks(const std::string& text) {
  std::vector<std::int32_t> blocks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    blocks.push_back(std::stoi(item));
  }
  if (blocks.empty()) throw CLI::ValidationError("--blocks", "expected e.g. 50,50,50");
  return blocks;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed, bool seed_given) {
  auto config = linkpred::ExperimentConfig::load(config_path);
  if (seed_given) config.seed = seed;
  const auto report = linkpred::run_experiment(config);
  const std::filesystem::path out = out_dir.empty() ? config.output_dir : out_dir;
  linkpred::emit_report(report, out);

  std::cout << "wrote " << (out / "metrics.csv").string() << "\n";
  std::cout << "method,precision,recall,f1,auc\n";
  for (const auto& row : report.rows) {
    if (row.not_implemented) {
      std::cout << row.name << ",NA,NA,NA,NA\n";
      continue;
    }
    std::cout << row.name << ',' << row.scores.precision << ',' << row.scores.recall
              << ',' << row.scores.f1 << ',' << row.auc_value << "\n";
  }
  return 0;
}

int cmd_generate_sbm(const std::string& blocks_text, double p_in, double p_out,
                     std::uint64_t seed, const std::string& out_path,
                     const std::string& partition_path) {
  linkpred::BlockModelSpec spec;
  spec.block_sizes = parse_blocks(blocks_text);
  spec.p_in = p_in;
  spec.p_out = p_out;
  spec.seed = seed;
  const auto [graph, truth] = linkpred::generate_sbm(spec);

  linkpred::NodeTable table;
  for (linkpred::NodeId u = 0; u < graph.num_nodes(); ++u) {
    table.intern(std::to_string(u));
  }
  linkpred::write_edge_csv(out_path, graph, table);
  std::cout << "wrote " << out_path << " (" << graph.num_nodes() << " nodes, "
            << graph.num_edges() << " edges)\n";
  if (!partition_path.empty()) {
    linkpred::write_communities_csv(partition_path, truth, table);
    std::cout << "wrote " << partition_path << "\n";
  }
  return 0;
}

int cmd_split(const std::string& edges_path, double test_fraction, std::uint64_t seed,
              const std::string& out_path) {
  linkpred::NodeTable table;
  const auto graph =
      linkpred::graph_from_string_edges(linkpred::read_edge_csv(edges_path), table);
  const auto data = linkpred::build_datasets(graph, test_fraction, seed);
  linkpred::write_split_csv(out_path, data, table);
  std::cout << "wrote " << out_path << " (" << data.train.size() << " train, "
            << data.test.size() << " test samples)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"link prediction experiments on undirected graphs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 42;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory (defaults to config output_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");

  std::string blocks_text;
  double p_in = 0.1;
  double p_out = 0.01;
  std::uint64_t sbm_seed = 42;
  std::string sbm_out;
  std::string partition_out;
  auto* gen = app.add_subcommand("generate-sbm", "write a synthetic block-model edge CSV");
  gen->add_option("--blocks", blocks_text, "comma-separated block sizes, e.g. 50,50")
      ->required();
  gen->add_option("--p-in", p_in, "intra-block edge probability")->required();
  gen->add_option("--p-out", p_out, "inter-block edge probability")->required();
  gen->add_option("--seed", sbm_seed, "generator seed");
  gen->add_option("--out", sbm_out, "output edge CSV path")->required();
  gen->add_option("--partition", partition_out, "also write ground-truth communities CSV");

  std::string edges_path;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 42;
  std::string split_out;
  auto* split = app.add_subcommand("split", "build a labeled train/test split from an edge CSV");
  split->add_option("--edges", edges_path, "input edge CSV")->required();
  split->add_option("--test-fraction", test_fraction, "fraction of edges held out");
  split->add_option("--seed", split_seed, "split seed");
  split->add_option("--out", split_out, "output split CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, out_dir, seed, seed_opt->count() > 0);
    }
    if (gen->parsed()) {
      return cmd_generate_sbm(blocks_text, p_in, p_out, sbm_seed, sbm_out, partition_out);
    }
    if (split->parsed()) {
      return cmd_split(edges_path, test_fraction, split_seed, split_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
