#include "dagnn/mpnn.hpp"

#include <cmath>
#include <string>

#include "dagnn/errors.hpp"
#include "dagnn/rng.hpp"

namespace dagnn {

void MpnnConfig::validate() const {
  if (num_layers < 1) throw Error("mpnn config: num_layers must be >= 1");
  if (hidden_dim < 1) throw Error("mpnn config: hidden_dim must be >= 1");
  if (input_dim < 1) throw Error("mpnn config: input_dim must be >= 1");
  if (output_dim < 1) throw Error("mpnn config: output_dim must be >= 1");
  if (output == OutputKind::regression && output_dim != 1)
    throw Error("mpnn config: regression output_dim must be 1");
}

MpnnModel::MpnnModel(MpnnConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int d = config_.hidden_dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));

  auto mat = [&](const std::string& name, int rows, int cols) {
    DenseArray a = DenseArray::zeros(static_cast<std::size_t>(rows),
                                     static_cast<std::size_t>(cols));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(-bound, bound);
    return set_.add(name, a);
  };
  auto bias = [&](const std::string& name, int len) {
    return set_.add(name, DenseArray::vector(static_cast<std::size_t>(len)));
  };

  input_W_ = mat("input.W", d, config_.input_dim);
  input_b_ = bias("input.b", d);
  for (int l = 1; l <= config_.num_layers; ++l) {
    const std::string prefix = "mpnn" + std::to_string(l) + ".";
    LayerIdx li;
    li.W1 = mat(prefix + "W1", d, d);
    li.W2 = mat(prefix + "W2", d, d);
    li.b = bias(prefix + "b", d);
    layers_.push_back(li);
  }
  readout_W_ = mat("readout.W", config_.output_dim, d);
  readout_b_ = bias("readout.b", config_.output_dim);
}

namespace {

Value mean_of(Tape& tape, const std::vector<Value>& parts, int dim) {
  if (parts.empty()) return tape.input(DenseArray::vector(static_cast<std::size_t>(dim)));
  Value acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return scale_const(acc, 1.0 / static_cast<double>(parts.size()));
}

}  // namespace

std::vector<std::vector<Value>> MpnnModel::node_states(Tape& tape,
                                                       std::span<const Value> leaves,
                                                       const Dag& dag) const {
  if (static_cast<int>(dag.feature_dim()) != config_.input_dim)
    throw DimensionError("mpnn: graph feature dimension mismatch");

  const std::size_t n = dag.num_nodes();
  std::vector<std::vector<Value>> states(static_cast<std::size_t>(config_.num_layers) + 1);

  states[0].reserve(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto row = dag.feature(v);
    DenseArray x = DenseArray::vector(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) x[j] = row[j];
    states[0].push_back(add(matvec(leaves[input_W_], tape.input(std::move(x))),
                            leaves[input_b_]));
  }

  std::vector<Value> neighbor_states;
  for (int l = 1; l <= config_.num_layers; ++l) {
    const LayerIdx& li = layers_[static_cast<std::size_t>(l - 1)];
    const auto& prev = states[static_cast<std::size_t>(l - 1)];
    auto& cur = states[static_cast<std::size_t>(l)];
    cur.reserve(n);
    for (NodeId v = 0; v < n; ++v) {
      neighbor_states.clear();
      for (const Dag::Pred& p : dag.predecessors(v)) neighbor_states.push_back(prev[p.node]);
      for (NodeId u : dag.successors(v)) neighbor_states.push_back(prev[u]);
      const Value mean = mean_of(tape, neighbor_states, config_.hidden_dim);
      cur.push_back(tanh(add(add(matvec(leaves[li.W1], prev[v]),
                                 matvec(leaves[li.W2], mean)),
                             leaves[li.b])));
    }
  }
  return states;
}

std::vector<Value> MpnnModel::forward_batch(Tape& tape, std::span<const Value> leaves,
                                            std::span<const Dag* const> graphs) const {
  if (graphs.empty()) throw EmptyInput("forward_batch: no graphs");

  std::vector<Value> outputs;
  outputs.reserve(graphs.size());
  for (const Dag* g : graphs) {
    const auto states = node_states(tape, leaves, *g);
    const auto& last = states.back();
    const Value pooled = mean_of(tape, last, config_.hidden_dim);
    outputs.push_back(add(matvec(leaves[readout_W_], pooled), leaves[readout_b_]));
  }
  return outputs;
}

}  // namespace dagnn
