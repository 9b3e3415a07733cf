#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "dagnn/dag.hpp"
#include "dagnn/model.hpp"
#include "dagnn/rng.hpp"
#include "dagnn/tape.hpp"

namespace testutil {

using dagnn::Dag;
using dagnn::Edge;
using dagnn::NodeId;

// The worked 5-node example: edges (0,3), (1,3), (2,3), (3,4).
inline Dag figure1(int d_in = 2) {
  std::vector<Edge> edges{{0, 3, 0}, {1, 3, 1}, {2, 3, 0}, {3, 4, 1}};
  dagnn::DenseArray features =
      dagnn::DenseArray::zeros(5, static_cast<std::size_t>(d_in));
  for (std::size_t i = 0; i < features.size(); ++i)
    features[i] = 0.1 * static_cast<double>(i + 1);
  return Dag::build(5, std::move(edges), std::move(features));
}

inline Dag chain(int k, int d_in = 2, double feature_value = 0.5) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < k; ++i)
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 1), 0});
  dagnn::DenseArray features =
      dagnn::DenseArray::zeros(static_cast<std::size_t>(k), static_cast<std::size_t>(d_in));
  for (std::size_t i = 0; i < features.size(); ++i) features[i] = feature_value;
  return Dag::build(static_cast<std::size_t>(k), std::move(edges), std::move(features));
}

inline std::vector<NodeId> random_permutation(dagnn::Rng& rng, std::size_t n) {
  std::vector<NodeId> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<NodeId>(i);
  for (std::size_t i = n; i > 1; --i)
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  return perm;
}

// Random DAG with arbitrary node labels: edges drawn on a hidden total
// order, then relabeled by a random bijection. Independent of the library's
// dataset generator.
inline Dag random_dag(dagnn::Rng& rng, int n_min, int n_max, double edge_prob,
                      int num_edge_types, int d_in) {
  const int n = rng.uniform_int(n_min, n_max);
  const auto perm = random_permutation(rng, static_cast<std::size_t>(n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < edge_prob)
        edges.push_back({perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)],
                         num_edge_types == 1 ? 0 : rng.uniform_int(0, num_edge_types - 1)});
  dagnn::DenseArray features =
      dagnn::DenseArray::zeros(static_cast<std::size_t>(n), static_cast<std::size_t>(d_in));
  for (std::size_t i = 0; i < features.size(); ++i) features[i] = rng.uniform(-1.0, 1.0);
  return Dag::build(static_cast<std::size_t>(n), std::move(edges), std::move(features));
}

// reachable[u][v] = true iff a directed path u -> v exists (u != v)
inline std::vector<std::vector<bool>> reachability(const Dag& dag) {
  const std::size_t n = dag.num_nodes();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (NodeId s = 0; s < n; ++s) {
    std::vector<NodeId> stack{s};
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : dag.successors(u))
        if (!reach[s][w]) {
          reach[s][w] = true;
          stack.push_back(w);
        }
    }
  }
  return reach;
}

// exhaustive longest path in node count, for small graphs
inline std::size_t brute_force_longest_path_nodes(const Dag& dag) {
  const std::size_t n = dag.num_nodes();
  if (n == 0) return 0;
  std::size_t best = 1;
  // depth-first over all paths
  std::vector<std::pair<NodeId, std::size_t>> stack;
  for (NodeId s = 0; s < n; ++s) stack.push_back({s, 1});
  while (!stack.empty()) {
    const auto [u, len] = stack.back();
    stack.pop_back();
    best = std::max(best, len);
    for (NodeId w : dag.successors(u)) stack.push_back({w, len + 1});
  }
  return best;
}

// Scalar-by-scalar GRU reference; W matrices are row-major (out x in).
inline std::vector<double> reference_gru(
    const std::vector<double>& x, const std::vector<double>& s,
    const dagnn::DenseArray& Wz, const dagnn::DenseArray& Uz, const dagnn::DenseArray& bz,
    const dagnn::DenseArray& Wr, const dagnn::DenseArray& Ur, const dagnn::DenseArray& br,
    const dagnn::DenseArray& Wn, const dagnn::DenseArray& Un, const dagnn::DenseArray& bn) {
  const std::size_t d = x.size();
  const auto sigm = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> out(d);
  std::vector<double> r(d);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = br[i];
    for (std::size_t j = 0; j < d; ++j) acc += Wr(i, j) * x[j] + Ur(i, j) * s[j];
    r[i] = sigm(acc);
  }
  for (std::size_t i = 0; i < d; ++i) {
    double zi = bz[i];
    double ni = bn[i];
    for (std::size_t j = 0; j < d; ++j) {
      zi += Wz(i, j) * x[j] + Uz(i, j) * s[j];
      ni += Wn(i, j) * x[j] + Un(i, j) * (r[j] * s[j]);
    }
    zi = sigm(zi);
    ni = std::tanh(ni);
    out[i] = (1.0 - zi) * ni + zi * s[i];
  }
  return out;
}

// Unbatched recursive evaluation of the full model on one graph. Uses the
// same per-node operators but no topological batching, no disjoint union,
// and no scheduler: states are computed by memoized recursion over direct
// predecessors. Checks the batched driver end to end.
class RecursiveForward {
 public:
  RecursiveForward(dagnn::Tape& tape, const dagnn::DagnnModel& model,
                   std::span<const dagnn::Value> leaves, const Dag& dag)
      : tape_(tape),
        config_(model.config()),
        idx_(model.param_index()),
        leaves_(leaves),
        dag_(dag),
        reversed_(dagnn::reverse(dag)) {}

  dagnn::Value output() {
    std::vector<dagnn::Value> h0;
    for (NodeId v = 0; v < dag_.num_nodes(); ++v) {
      const auto row = dag_.feature(v);
      dagnn::DenseArray x = dagnn::DenseArray::vector(row.size());
      for (std::size_t j = 0; j < row.size(); ++j) x[j] = row[j];
      h0.push_back(dagnn::add(dagnn::matvec(leaves_[idx_.input_W], tape_.input(std::move(x))),
                              leaves_[idx_.input_b]));
    }
    h0_ = std::move(h0);

    const bool pool_all = config_.readout_scope == dagnn::ReadoutScope::all_nodes;
    std::vector<NodeId> everything(dag_.num_nodes());
    for (NodeId v = 0; v < dag_.num_nodes(); ++v) everything[v] = v;

    const auto pool_set = [&](std::span<const NodeId> nodes, const Dag& graph,
                              const dagnn::DirectionIdx& dir,
                              std::map<std::pair<int, NodeId>, dagnn::Value>& memo) {
      std::vector<dagnn::Value> per_node;
      for (NodeId v : nodes) {
        std::vector<dagnn::Value> layers;
        for (int l = 0; l <= config_.num_layers; ++l)
          layers.push_back(state(graph, dir, memo, l, v));
        per_node.push_back(dagnn::concat(layers));
      }
      return dagnn::max_pool(per_node);
    };

    dagnn::Value pooled = pool_set(
        pool_all ? std::span<const NodeId>(everything) : dag_.targets(), dag_, idx_.fwd,
        fwd_memo_);
    if (config_.bidirectional) {
      const dagnn::Value rev_pooled =
          pool_set(pool_all ? std::span<const NodeId>(everything) : dag_.sources(),
                   reversed_, idx_.rev, rev_memo_);
      pooled = dagnn::concat(std::vector<dagnn::Value>{pooled, rev_pooled});
    }
    return dagnn::add(dagnn::matvec(leaves_[idx_.readout_W], pooled),
                      leaves_[idx_.readout_b]);
  }

 private:
  dagnn::Value state(const Dag& graph, const dagnn::DirectionIdx& dir,
                     std::map<std::pair<int, NodeId>, dagnn::Value>& memo, int layer,
                     NodeId v) {
    if (layer == 0) return h0_[v];
    const auto key = std::make_pair(layer, v);
    if (const auto it = memo.find(key); it != memo.end()) return it->second;

    std::vector<dagnn::PredState> preds;
    for (const Dag::Pred& p : graph.predecessors(v))
      preds.push_back({state(graph, dir, memo, layer, p.node), p.edge_type});
    const dagnn::Value previous = state(graph, dir, memo, layer - 1, v);

    const dagnn::LayerIdx& li = dir.layers[static_cast<std::size_t>(layer - 1)];
    dagnn::Value message;
    switch (config_.aggregator) {
      case dagnn::Aggregator::attention:
        message = aggregate_attention(tape_, previous, preds, leaves_[li.w1],
                                      leaves_[li.w2], nullptr, config_.hidden_dim);
        break;
      case dagnn::Aggregator::attention_edge: {
        const dagnn::Value emb = leaves_[dir.edge_emb];
        message = aggregate_attention(tape_, previous, preds, leaves_[li.w1],
                                      leaves_[li.w2], &emb, config_.hidden_dim);
        break;
      }
      case dagnn::Aggregator::gated_sum:
        message = aggregate_gated_sum(tape_, preds, leaves_[li.gs_Wg], leaves_[li.gs_bg],
                                      leaves_[li.gs_Wm], leaves_[li.gs_bm],
                                      config_.hidden_dim);
        break;
    }

    dagnn::Value result;
    if (config_.combiner == dagnn::Combiner::gru) {
      const dagnn::BoundGru gru{leaves_[li.gru.Wz], leaves_[li.gru.Uz], leaves_[li.gru.bz],
                                leaves_[li.gru.Wr], leaves_[li.gru.Ur], leaves_[li.gru.br],
                                leaves_[li.gru.Wn], leaves_[li.gru.Un], leaves_[li.gru.bn]};
      result = combine_gru(previous, message, gru);
    } else {
      result = combine_fc(previous, message, leaves_[li.fc_W], leaves_[li.fc_b]);
    }
    memo.emplace(key, result);
    return result;
  }

  dagnn::Tape& tape_;
  const dagnn::DagnnConfig& config_;
  const dagnn::DagnnParams& idx_;
  std::span<const dagnn::Value> leaves_;
  const Dag& dag_;
  Dag reversed_;
  std::vector<dagnn::Value> h0_;
  std::map<std::pair<int, NodeId>, dagnn::Value> fwd_memo_;
  std::map<std::pair<int, NodeId>, dagnn::Value> rev_memo_;
};

inline double max_abs_diff(const dagnn::DenseArray& a, const dagnn::DenseArray& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace testutil
