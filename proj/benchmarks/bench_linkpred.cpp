#include <benchmark/benchmark.h>

#include "linkpred/autodiff.hpp"
#include "linkpred/features.hpp"
#include "linkpred/gnn.hpp"
#include "linkpred/heuristics.hpp"
#include "linkpred/louvain.hpp"
#include "linkpred/rng.hpp"
#include "linkpred/sampler.hpp"
#include "linkpred/sbm.hpp"

namespace {

using namespace linkpred;

std::pair<Graph, Partition> bench_graph() {
  BlockModelSpec spec;
  spec.block_sizes = std::vector<std::int32_t>(8, 50);
  spec.p_in = 0.10;
  spec.p_out = 0.005;
  spec.seed = 42;
  return generate_sbm(spec);
}

void BM_HeuristicScores(benchmark::State& state) {
  const auto [g, truth] = bench_graph();
  const Datasets data = build_datasets(g, 0.2, 42);
  const HeuristicKind kind = static_cast<HeuristicKind>(state.range(0));
  for (auto _ : state) {
    double acc = 0.0;
    for (const auto& [u, v] : data.test.pairs) {
      acc += heuristic_score(g, kind, u, v);
    }
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(data.test.size()));
}
BENCHMARK(BM_HeuristicScores)
    ->Arg(static_cast<int>(HeuristicKind::CommonNeighbors))
    ->Arg(static_cast<int>(HeuristicKind::Jaccard))
    ->Arg(static_cast<int>(HeuristicKind::AdamicAdar))
    ->Arg(static_cast<int>(HeuristicKind::ResourceAllocation));

void BM_Louvain(benchmark::State& state) {
  const auto [g, truth] = bench_graph();
  for (auto _ : state) {
    benchmark::DoNotOptimize(louvain(g, 1e-7, 42));
  }
}
BENCHMARK(BM_Louvain);

void BM_Modularity(benchmark::State& state) {
  const auto [g, truth] = bench_graph();
  const Partition p = louvain(g, 1e-7, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(modularity(g, p));
  }
}
BENCHMARK(BM_Modularity);

void BM_NegativeSampling(benchmark::State& state) {
  const auto [g, truth] = bench_graph();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_non_links(g, g.num_edges(), {}, 42));
  }
}
BENCHMARK(BM_NegativeSampling);

void BM_TapeDenseLayer(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(1);
  ad::Mat x(n, n), w(n, 128);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) x(i, j) = rng.uniform(-1, 1);
    for (std::int64_t j = 0; j < 128; ++j) w(i, j) = rng.uniform(-1, 1);
  }
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Var wv = tape.leaf(w, true);
    const ad::Var h = tape.relu(tape.matmul(tape.leaf(x), wv));
    const ad::Var loss = tape.matmul(tape.leaf(ad::Mat::Ones(1, n)),
                                     tape.rowsum(h));
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(wv));
  }
}
BENCHMARK(BM_TapeDenseLayer)->Arg(128)->Arg(400);

void BM_GcnTrainEpochs(benchmark::State& state) {
  const auto [g, truth] = bench_graph();
  const Datasets data = build_datasets(g, 0.2, 42);
  const Graph g_train = [&] {
    std::vector<NodePair> edges;
    for (std::size_t i = 0; i < data.train.size(); ++i) {
      if (data.train.labels[i] == 1) edges.push_back(data.train.pairs[i]);
    }
    return Graph::from_edges(edges, g.num_nodes());
  }();
  const ad::SpMat x = to_sparse(FeatureMatrix::identity(g.num_nodes()));
  ModelConfig cfg = ModelConfig::defaults(Architecture::GCN);
  cfg.max_epochs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_gnn(cfg, x, data.train, g_train));
  }
}
BENCHMARK(BM_GcnTrainEpochs)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_TfidfFit(benchmark::State& state) {
  Rng rng(3);
  std::vector<std::string> lexicon;
  for (int i = 0; i < 500; ++i) lexicon.push_back("term" + std::to_string(i));
  std::vector<std::vector<std::string>> docs(1000);
  for (auto& d : docs) {
    const std::size_t len = 5 + rng.bounded(40);
    for (std::size_t t = 0; t < len; ++t) d.push_back(lexicon[rng.bounded(500)]);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(tfidf(docs));
  }
}
BENCHMARK(BM_TfidfFit);

}  // namespace

BENCHMARK_MAIN();
