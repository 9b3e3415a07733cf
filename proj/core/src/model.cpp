#include "dagnn/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "dagnn/errors.hpp"
#include "dagnn/rng.hpp"

namespace dagnn {

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::attention: return "attention";
    case Aggregator::attention_edge: return "attention_edge";
    case Aggregator::gated_sum: return "gated_sum";
  }
  return "?";
}

std::string to_string(Combiner c) {
  return c == Combiner::gru ? "gru" : "fc";
}

std::string to_string(ReadoutScope r) {
  return r == ReadoutScope::targets_only ? "targets" : "all";
}

std::string to_string(OutputKind k) {
  return k == OutputKind::classification ? "classification" : "regression";
}

Aggregator parse_aggregator(std::string_view s) {
  if (s == "attention") return Aggregator::attention;
  if (s == "attention_edge") return Aggregator::attention_edge;
  if (s == "gated_sum") return Aggregator::gated_sum;
  throw Error("unknown aggregator: " + std::string(s));
}

Combiner parse_combiner(std::string_view s) {
  if (s == "gru") return Combiner::gru;
  if (s == "fc") return Combiner::fully_connected;
  throw Error("unknown combiner: " + std::string(s));
}

ReadoutScope parse_readout_scope(std::string_view s) {
  if (s == "targets") return ReadoutScope::targets_only;
  if (s == "all") return ReadoutScope::all_nodes;
  throw Error("unknown readout scope: " + std::string(s));
}

OutputKind parse_output_kind(std::string_view s) {
  if (s == "classification") return OutputKind::classification;
  if (s == "regression") return OutputKind::regression;
  throw Error("unknown output kind: " + std::string(s));
}

void DagnnConfig::validate() const {
  if (num_layers < 1) throw Error("config: num_layers must be >= 1");
  if (hidden_dim < 1) throw Error("config: hidden_dim must be >= 1");
  if (input_dim < 1) throw Error("config: input_dim must be >= 1");
  if (num_edge_types < 1) throw Error("config: num_edge_types must be >= 1");
  if (output_dim < 1) throw Error("config: output_dim must be >= 1");
  if (output == OutputKind::regression && output_dim != 1)
    throw Error("config: regression output_dim must be 1");
}

namespace {

DenseArray uniform_array(std::size_t rows, std::size_t cols, Rng& rng, double bound) {
  DenseArray a = DenseArray::zeros(rows, cols);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(-bound, bound);
  return a;
}

Value zero_vector(Tape& tape, int len) {
  return tape.input(DenseArray::vector(static_cast<std::size_t>(len)));
}

// max over the node set of concat(h^0 .. h^L)
Value pooled_concat(const NodeStates& states, std::span<const NodeId> nodes) {
  std::vector<Value> per_node;
  per_node.reserve(nodes.size());
  std::vector<Value> layers(states.h.size());
  for (NodeId v : nodes) {
    for (std::size_t l = 0; l < states.h.size(); ++l) layers[l] = states.h[l][v];
    per_node.push_back(concat(layers));
  }
  return max_pool(per_node);
}

std::vector<NodeId> shifted(std::span<const NodeId> nodes, std::size_t offset) {
  std::vector<NodeId> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) out.push_back(static_cast<NodeId>(v + offset));
  return out;
}

std::vector<NodeId> node_range(std::size_t n, std::size_t offset) {
  std::vector<NodeId> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = static_cast<NodeId>(v + offset);
  return out;
}

}  // namespace

Value aggregate_attention(Tape& tape, Value h_prev, std::span<const PredState> preds,
                          Value w1, Value w2, const Value* edge_emb, int hidden_dim) {
  if (preds.empty()) return zero_vector(tape, hidden_dim);

  // The query term is constant across predecessors; it cancels in the
  // softmax but is kept on the tape so the computation matches the stated
  // form.
  const Value query = dot(w1, h_prev);
  std::vector<Value> logits;
  logits.reserve(preds.size());
  for (const PredState& p : preds) {
    Value e = add(query, dot(w2, p.h));
    if (edge_emb != nullptr) {
      const std::size_t d = static_cast<std::size_t>(hidden_dim);
      const Value y = slice(*edge_emb, static_cast<std::size_t>(p.edge_type) * d, d);
      e = add(e, dot(w1, y));  // tied w3 = w1
    }
    logits.push_back(e);
  }
  const Value alpha = softmax(concat(logits));
  Value message = scale(slice(alpha, 0, 1), preds[0].h);
  for (std::size_t i = 1; i < preds.size(); ++i)
    message = add(message, scale(slice(alpha, i, 1), preds[i].h));
  return message;
}

Value aggregate_gated_sum(Tape& tape, std::span<const PredState> preds, Value Wg,
                          Value bg, Value Wm, Value bm, int hidden_dim) {
  if (preds.empty()) return zero_vector(tape, hidden_dim);
  Value message;
  bool first = true;
  for (const PredState& p : preds) {
    const Value gate = sigmoid(add(matvec(Wg, p.h), bg));
    const Value mapped = add(matvec(Wm, p.h), bm);
    const Value term = mul(gate, mapped);
    message = first ? term : add(message, term);
    first = false;
  }
  return message;
}

Value combine_gru(Value x, Value s, const BoundGru& g) {
  const Value z = sigmoid(add(add(matvec(g.Wz, x), matvec(g.Uz, s)), g.bz));
  const Value r = sigmoid(add(add(matvec(g.Wr, x), matvec(g.Ur, s)), g.br));
  const Value n = tanh(add(add(matvec(g.Wn, x), matvec(g.Un, mul(r, s))), g.bn));
  return add(mul(one_minus(z), n), mul(z, s));
}

Value combine_fc(Value x, Value m, Value W, Value b) {
  const Value joined = concat(std::vector<Value>{x, m});
  return tanh(add(matvec(W, joined), b));
}

NodeStates forward_direction(Tape& tape, const Dag& graph, const TopoBatches& batches,
                             std::span<const Value> leaves, const DirectionIdx& dir,
                             const DagnnConfig& config, const std::vector<Value>& h0) {
  const std::size_t n = graph.num_nodes();
  if (h0.size() != n) throw ShapeError("forward_direction: h0 size mismatch");

  NodeStates states;
  states.h.resize(static_cast<std::size_t>(config.num_layers) + 1);
  states.h[0] = h0;

  std::vector<PredState> preds;
  for (int layer = 1; layer <= config.num_layers; ++layer) {
    const LayerIdx& li = dir.layers[static_cast<std::size_t>(layer - 1)];
    Value emb;
    const Value* edge_emb = nullptr;
    if (config.aggregator == Aggregator::attention_edge) {
      emb = leaves[dir.edge_emb];
      edge_emb = &emb;
    }

    auto& current = states.h[static_cast<std::size_t>(layer)];
    const auto& previous = states.h[static_cast<std::size_t>(layer - 1)];
    current.resize(n);
    for (const auto& batch : batches.batches) {
      for (NodeId v : batch) {
        preds.clear();
        for (const Dag::Pred& p : graph.predecessors(v))
          preds.push_back({current[p.node], p.edge_type});

        Value message;
        switch (config.aggregator) {
          case Aggregator::attention:
            message = aggregate_attention(tape, previous[v], preds, leaves[li.w1],
                                          leaves[li.w2], nullptr, config.hidden_dim);
            break;
          case Aggregator::attention_edge:
            message = aggregate_attention(tape, previous[v], preds, leaves[li.w1],
                                          leaves[li.w2], edge_emb, config.hidden_dim);
            break;
          case Aggregator::gated_sum:
            message = aggregate_gated_sum(tape, preds, leaves[li.gs_Wg], leaves[li.gs_bg],
                                          leaves[li.gs_Wm], leaves[li.gs_bm],
                                          config.hidden_dim);
            break;
        }

        if (config.combiner == Combiner::gru) {
          const BoundGru gru{leaves[li.gru.Wz], leaves[li.gru.Uz], leaves[li.gru.bz],
                             leaves[li.gru.Wr], leaves[li.gru.Ur], leaves[li.gru.br],
                             leaves[li.gru.Wn], leaves[li.gru.Un], leaves[li.gru.bn]};
          current[v] = combine_gru(previous[v], message, gru);
        } else {
          current[v] = combine_fc(previous[v], message, leaves[li.fc_W], leaves[li.fc_b]);
        }
      }
    }
  }
  return states;
}

Value readout(Tape& tape, const NodeStates& states, const NodeStates* rev_states,
              const Dag& dag, std::span<const Value> leaves, const DagnnParams& idx,
              const DagnnConfig& config) {
  (void)tape;
  const bool pool_all = config.readout_scope == ReadoutScope::all_nodes;
  const std::vector<NodeId> everything =
      pool_all ? node_range(dag.num_nodes(), 0) : std::vector<NodeId>{};

  Value pooled = pooled_concat(
      states, pool_all ? std::span<const NodeId>(everything) : dag.targets());
  if (rev_states != nullptr) {
    // In the reversed graph the target set is the original source set.
    const Value rev_pooled = pooled_concat(
        *rev_states, pool_all ? std::span<const NodeId>(everything) : dag.sources());
    pooled = concat(std::vector<Value>{pooled, rev_pooled});
  }
  return add(matvec(leaves[idx.readout_W], pooled), leaves[idx.readout_b]);
}

DagnnModel::DagnnModel(DagnnConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int d = config_.hidden_dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));

  auto mat = [&](const std::string& name, int rows, int cols) {
    return set_.add(name, uniform_array(static_cast<std::size_t>(rows),
                                        static_cast<std::size_t>(cols), rng, bound));
  };
  auto vec = [&](const std::string& name, int len) {
    return set_.add(name, uniform_array(static_cast<std::size_t>(len), 1, rng, bound));
  };
  auto bias = [&](const std::string& name, int len) {
    return set_.add(name, DenseArray::vector(static_cast<std::size_t>(len)));
  };

  idx_.input_W = mat("input.W", d, config_.input_dim);
  idx_.input_b = bias("input.b", d);

  const auto build_direction = [&](const std::string& dname) {
    DirectionIdx dir;
    for (int l = 1; l <= config_.num_layers; ++l) {
      const std::string suffix = std::to_string(l) + "." + dname + ".";
      LayerIdx li;
      if (config_.aggregator == Aggregator::gated_sum) {
        li.gs_Wg = mat("gsum" + suffix + "Wg", d, d);
        li.gs_bg = bias("gsum" + suffix + "bg", d);
        li.gs_Wm = mat("gsum" + suffix + "Wm", d, d);
        li.gs_bm = bias("gsum" + suffix + "bm", d);
      } else {
        li.w1 = vec("layer" + suffix + "w1", d);
        li.w2 = vec("layer" + suffix + "w2", d);
      }
      if (config_.combiner == Combiner::gru) {
        li.gru.Wz = mat("gru" + suffix + "Wz", d, d);
        li.gru.Uz = mat("gru" + suffix + "Uz", d, d);
        li.gru.bz = bias("gru" + suffix + "bz", d);
        li.gru.Wr = mat("gru" + suffix + "Wr", d, d);
        li.gru.Ur = mat("gru" + suffix + "Ur", d, d);
        li.gru.br = bias("gru" + suffix + "br", d);
        li.gru.Wn = mat("gru" + suffix + "Wn", d, d);
        li.gru.Un = mat("gru" + suffix + "Un", d, d);
        li.gru.bn = bias("gru" + suffix + "bn", d);
      } else {
        li.fc_W = mat("fc" + suffix + "W", d, 2 * d);
        li.fc_b = bias("fc" + suffix + "b", d);
      }
      dir.layers.push_back(li);
    }
    if (config_.aggregator == Aggregator::attention_edge)
      dir.edge_emb = mat("edge_emb." + dname, config_.num_edge_types, d);
    return dir;
  };

  idx_.fwd = build_direction("fwd");
  if (config_.bidirectional) idx_.rev = build_direction("rev");

  const int pre = (config_.bidirectional ? 2 : 1) * (config_.num_layers + 1) * d;
  idx_.readout_W = mat("readout.W", config_.output_dim, pre);
  idx_.readout_b = bias("readout.b", config_.output_dim);
}

std::vector<Value> DagnnModel::forward_batch(Tape& tape, std::span<const Value> leaves,
                                             std::span<const Dag* const> graphs) const {
  if (graphs.empty()) throw EmptyInput("forward_batch: no graphs");
  for (const Dag* g : graphs) {
    if (static_cast<int>(g->feature_dim()) != config_.input_dim)
      throw DimensionError("forward_batch: graph feature dimension " +
                           std::to_string(g->feature_dim()) + " != input_dim " +
                           std::to_string(config_.input_dim));
    if (config_.aggregator == Aggregator::attention_edge)
      for (const Edge& e : g->edges())
        if (e.edge_type >= config_.num_edge_types)
          throw ShapeError("forward_batch: edge type " + std::to_string(e.edge_type) +
                           " outside embedding table of size " +
                           std::to_string(config_.num_edge_types));
  }

  const Dag merged = disjoint_union(graphs);
  const TopoBatches batches = merge_batches(graphs);

  // shared projected input: h^0 for both directions
  const Value in_W = leaves[idx_.input_W];
  const Value in_b = leaves[idx_.input_b];
  std::vector<Value> h0;
  h0.reserve(merged.num_nodes());
  for (NodeId v = 0; v < merged.num_nodes(); ++v) {
    const auto row = merged.feature(v);
    DenseArray x = DenseArray::vector(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) x[j] = row[j];
    h0.push_back(add(matvec(in_W, tape.input(std::move(x))), in_b));
  }

  const NodeStates fwd_states =
      forward_direction(tape, merged, batches, leaves, idx_.fwd, config_, h0);

  NodeStates rev_states;
  if (config_.bidirectional) {
    std::vector<Dag> reversed;
    reversed.reserve(graphs.size());
    for (const Dag* g : graphs) reversed.push_back(reverse(*g));
    const Dag rev_merged = disjoint_union(reversed);
    const TopoBatches rev_batches = merge_batches(reversed);
    rev_states =
        forward_direction(tape, rev_merged, rev_batches, leaves, idx_.rev, config_, h0);
  }

  const bool pool_all = config_.readout_scope == ReadoutScope::all_nodes;
  std::vector<Value> outputs;
  outputs.reserve(graphs.size());
  std::size_t offset = 0;
  for (const Dag* g : graphs) {
    const std::vector<NodeId> fwd_nodes =
        pool_all ? node_range(g->num_nodes(), offset) : shifted(g->targets(), offset);
    Value pooled = pooled_concat(fwd_states, fwd_nodes);
    if (config_.bidirectional) {
      const std::vector<NodeId> rev_nodes =
          pool_all ? node_range(g->num_nodes(), offset) : shifted(g->sources(), offset);
      pooled = concat(std::vector<Value>{pooled, pooled_concat(rev_states, rev_nodes)});
    }
    outputs.push_back(add(matvec(leaves[idx_.readout_W], pooled), leaves[idx_.readout_b]));
    offset += g->num_nodes();
  }
  return outputs;
}

Value GraphModel::forward_single(Tape& tape, std::span<const Value> leaves,
                                 const Dag& dag) const {
  const Dag* ptr = &dag;
  return forward_batch(tape, leaves, std::span<const Dag* const>(&ptr, 1)).front();
}

}  // namespace dagnn
