#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dagnn/dense_array.hpp"
#include "dagnn/errors.hpp"

namespace dagnn {

// Node index, dense in [0, num_nodes).
using NodeId = std::uint32_t;

struct Edge {
  NodeId tail = 0;
  NodeId head = 0;
  int edge_type = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Immutable validated DAG. Construction rejects self-loops, duplicate
// (tail, head) pairs, out-of-range indices, ragged features, and cycles.
// Edges are kept sorted by (tail, head) so structurally equal graphs
// compare equal regardless of input edge order.
class Dag {
 public:
  struct Pred {
    NodeId node = 0;
    int edge_type = 0;
    friend bool operator==(const Pred&, const Pred&) = default;
  };

  static Dag build(std::size_t num_nodes, std::vector<Edge> edges,
                   const std::vector<std::vector<double>>& features);
  static Dag build(std::size_t num_nodes, std::vector<Edge> edges,
                   DenseArray features);  // num_nodes x d_in, row per node

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }

  std::span<const Edge> edges() const { return edges_; }
  const DenseArray& features() const { return features_; }
  std::span<const double> feature(NodeId v) const {
    return features_.data().subspan(v * feature_dim_, feature_dim_);
  }

  std::span<const Pred> predecessors(NodeId v) const { return preds_[v]; }
  std::span<const NodeId> successors(NodeId v) const { return succs_[v]; }
  std::span<const NodeId> sources() const { return sources_; }
  std::span<const NodeId> targets() const { return targets_; }

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_ &&
           a.features_ == b.features_;
  }

 private:
  Dag() = default;

  std::size_t num_nodes_ = 0;
  std::size_t feature_dim_ = 0;
  std::vector<Edge> edges_;  // sorted by (tail, head)
  DenseArray features_;      // num_nodes x feature_dim, row-major
  std::vector<std::vector<Pred>> preds_;
  std::vector<std::vector<NodeId>> succs_;
  std::vector<NodeId> sources_;
  std::vector<NodeId> targets_;
};

// Edge-reversed graph: every (u, v) becomes (v, u), edge types and features
// kept. Sources and targets swap roles.
Dag reverse(const Dag& dag);

// Number of nodes on the longest directed path, via DP over a topological
// order. Serves as the independent oracle for the batch-count identity and
// as the label generator for the longest-path task.
std::size_t longest_path_node_count(const Dag& dag);

// Isomorphic relabeling: node v becomes perm[v]. Throws InvalidPermutation
// unless perm is a bijection on [0, num_nodes).
Dag permute(const Dag& dag, std::span<const NodeId> perm);

// Disjoint union; nodes of graph i are offset by the total node count of
// graphs 0..i-1. All graphs must share one feature dimension.
Dag disjoint_union(std::span<const Dag* const> graphs);
Dag disjoint_union(std::span<const Dag> graphs);

}  // namespace dagnn
