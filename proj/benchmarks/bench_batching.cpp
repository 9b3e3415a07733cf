#include <benchmark/benchmark.h>

#include <vector>

#include "dagnn/dag.hpp"
#include "dagnn/dataset.hpp"
#include "dagnn/rng.hpp"
#include "dagnn/topo_batches.hpp"

namespace {

using namespace dagnn;

Dag make_graph(int nodes, double edge_prob, std::uint64_t seed) {
  GenParams params;
  params.n_min = nodes;
  params.n_max = nodes;
  params.edge_prob = edge_prob;
  params.num_edge_types = 2;
  params.feature_mode = FeatureMode::onehot_indegree;
  Rng rng(seed);
  return gen_random_dag(params, rng);
}

void BM_ComputeBatches(benchmark::State& state) {
  const Dag dag = make_graph(static_cast<int>(state.range(0)), 0.05, 1);
  for (auto _ : state) {
    const TopoBatches batches = compute_batches(dag);
    benchmark::DoNotOptimize(batches.batches.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeBatches)->Arg(64)->Arg(256)->Arg(1024);

void BM_LongestPath(benchmark::State& state) {
  const Dag dag = make_graph(static_cast<int>(state.range(0)), 0.05, 2);
  for (auto _ : state) benchmark::DoNotOptimize(longest_path_node_count(dag));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LongestPath)->Arg(64)->Arg(256)->Arg(1024);

void BM_MergeBatches(benchmark::State& state) {
  std::vector<Dag> graphs;
  for (int i = 0; i < state.range(0); ++i)
    graphs.push_back(make_graph(15, 0.35, 10 + static_cast<std::uint64_t>(i)));
  for (auto _ : state) {
    const TopoBatches merged = merge_batches(graphs);
    benchmark::DoNotOptimize(merged.batches.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MergeBatches)->Arg(8)->Arg(32)->Arg(128);

void BM_Reverse(benchmark::State& state) {
  const Dag dag = make_graph(static_cast<int>(state.range(0)), 0.05, 3);
  for (auto _ : state) {
    const Dag flipped = reverse(dag);
    benchmark::DoNotOptimize(flipped.num_edges());
  }
}
BENCHMARK(BM_Reverse)->Arg(64)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
