#include <benchmark/benchmark.h>

#include <vector>

#include "dagnn/dataset.hpp"
#include "dagnn/model.hpp"
#include "dagnn/params.hpp"
#include "dagnn/train.hpp"

namespace {

using namespace dagnn;

struct ForwardSetup {
  ForwardSetup() {
    GenParams params;  // desk-scale graphs, n in [4, 15]
    samples = gen_lp_dataset(32, params, 7);
    for (const Sample& s : samples) graphs.push_back(&s.dag);

    DagnnConfig config;
    config.num_layers = 2;
    config.hidden_dim = 24;
    config.input_dim = static_cast<int>(samples.front().dag.feature_dim());
    config.num_edge_types = 2;
    config.output = OutputKind::classification;
    config.output_dim = config.input_dim;
    model = std::make_unique<DagnnModel>(config, 1);
  }

  std::vector<Sample> samples;
  std::vector<const Dag*> graphs;
  std::unique_ptr<DagnnModel> model;
};

const ForwardSetup& setup() {
  static ForwardSetup s;
  return s;
}

// one merged forward over the disjoint union of the whole data batch
void BM_ForwardMergedBatch(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) {
    Tape tape;
    const auto leaves = bind_params(tape, s.model->params());
    const auto outputs = s.model->forward_batch(tape, leaves, s.graphs);
    benchmark::DoNotOptimize(outputs.back().val()[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.graphs.size()));
}
BENCHMARK(BM_ForwardMergedBatch);

// the same work as one forward per graph
void BM_ForwardPerGraph(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) {
    Tape tape;
    const auto leaves = bind_params(tape, s.model->params());
    for (const Dag* g : s.graphs)
      benchmark::DoNotOptimize(s.model->forward_single(tape, leaves, *g).val()[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.graphs.size()));
}
BENCHMARK(BM_ForwardPerGraph);

void BM_ForwardBackwardStep(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) {
    Tape tape;
    const auto leaves = bind_params(tape, s.model->params());
    const auto outputs = s.model->forward_batch(tape, leaves, s.graphs);
    Value total;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const Value loss = cross_entropy_loss(
          tape, outputs[i], static_cast<int>(s.samples[i].label));
      total = i == 0 ? loss : add(total, loss);
    }
    tape.backward(scale_const(total, 1.0 / static_cast<double>(outputs.size())));
    benchmark::DoNotOptimize(leaves.front().grad()[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.graphs.size()));
}
BENCHMARK(BM_ForwardBackwardStep);

}  // namespace
