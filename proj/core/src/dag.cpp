#include "dagnn/dag.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace dagnn {

namespace {

DenseArray pack_features(std::size_t num_nodes,
                         const std::vector<std::vector<double>>& features) {
  if (features.size() != num_nodes)
    throw DimensionError("feature list length " + std::to_string(features.size()) +
                         " does not match node count " + std::to_string(num_nodes));
  const std::size_t dim = num_nodes == 0 ? 0 : features[0].size();
  DenseArray packed = DenseArray::zeros(num_nodes, dim);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    if (features[v].size() != dim)
      throw DimensionError("ragged features: node " + std::to_string(v) + " has dimension " +
                           std::to_string(features[v].size()) + ", expected " +
                           std::to_string(dim));
    for (std::size_t j = 0; j < dim; ++j) packed(v, j) = features[v][j];
  }
  return packed;
}

}  // namespace

Dag Dag::build(std::size_t num_nodes, std::vector<Edge> edges,
               const std::vector<std::vector<double>>& features) {
  return build(num_nodes, std::move(edges), pack_features(num_nodes, features));
}

Dag Dag::build(std::size_t num_nodes, std::vector<Edge> edges, DenseArray features) {
  if (features.rows() != num_nodes)
    throw DimensionError("feature matrix has " + std::to_string(features.rows()) +
                         " rows, expected " + std::to_string(num_nodes));

  for (const Edge& e : edges) {
    if (e.tail >= num_nodes || e.head >= num_nodes)
      throw Error("edge (" + std::to_string(e.tail) + ", " + std::to_string(e.head) +
                  ") references a node outside [0, " + std::to_string(num_nodes) + ")");
    if (e.tail == e.head)
      throw SelfLoopError("self-loop at node " + std::to_string(e.tail));
    if (e.edge_type < 0)
      throw Error("negative edge type on edge (" + std::to_string(e.tail) + ", " +
                  std::to_string(e.head) + ")");
  }

  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.tail != b.tail ? a.tail < b.tail : a.head < b.head;
  });
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i].tail == edges[i - 1].tail && edges[i].head == edges[i - 1].head)
      throw DuplicateEdgeError("duplicate edge (" + std::to_string(edges[i].tail) + ", " +
                               std::to_string(edges[i].head) + ")");

  Dag dag;
  dag.num_nodes_ = num_nodes;
  dag.feature_dim_ = features.cols();
  dag.features_ = std::move(features);
  dag.preds_.resize(num_nodes);
  dag.succs_.resize(num_nodes);
  for (const Edge& e : edges) {
    dag.preds_[e.head].push_back({e.tail, e.edge_type});
    dag.succs_[e.tail].push_back(e.head);
  }
  dag.edges_ = std::move(edges);

  // Kahn peeling doubles as the acyclicity check: a cycle is exactly a set
  // of nodes whose in-degrees never reach zero.
  std::vector<std::size_t> indegree(num_nodes);
  for (NodeId v = 0; v < num_nodes; ++v) indegree[v] = dag.preds_[v].size();
  std::queue<NodeId> ready;
  for (NodeId v = 0; v < num_nodes; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::size_t consumed = 0;
  while (!ready.empty()) {
    const NodeId u = ready.front();
    ready.pop();
    ++consumed;
    for (NodeId w : dag.succs_[u])
      if (--indegree[w] == 0) ready.push(w);
  }
  if (consumed != num_nodes)
    throw CycleError("graph contains a directed cycle through " +
                     std::to_string(num_nodes - consumed) + " node(s)");

  for (NodeId v = 0; v < num_nodes; ++v) {
    if (dag.preds_[v].empty()) dag.sources_.push_back(v);
    if (dag.succs_[v].empty()) dag.targets_.push_back(v);
  }
  return dag;
}

Dag reverse(const Dag& dag) {
  std::vector<Edge> flipped;
  flipped.reserve(dag.num_edges());
  for (const Edge& e : dag.edges()) flipped.push_back({e.head, e.tail, e.edge_type});
  DenseArray features = dag.features();
  return Dag::build(dag.num_nodes(), std::move(flipped), std::move(features));
}

std::size_t longest_path_node_count(const Dag& dag) {
  const std::size_t n = dag.num_nodes();
  if (n == 0) return 0;
  std::vector<std::size_t> indegree(n);
  for (NodeId v = 0; v < n; ++v) indegree[v] = dag.predecessors(v).size();
  std::queue<NodeId> ready;
  for (NodeId v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);

  // path_nodes[v] = node count of the longest path ending at v
  std::vector<std::size_t> path_nodes(n, 1);
  std::size_t best = 1;
  while (!ready.empty()) {
    const NodeId u = ready.front();
    ready.pop();
    best = std::max(best, path_nodes[u]);
    for (NodeId w : dag.successors(u)) {
      path_nodes[w] = std::max(path_nodes[w], path_nodes[u] + 1);
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  return best;
}

Dag permute(const Dag& dag, std::span<const NodeId> perm) {
  const std::size_t n = dag.num_nodes();
  if (perm.size() != n)
    throw InvalidPermutation("permutation has length " + std::to_string(perm.size()) +
                             ", expected " + std::to_string(n));
  std::vector<bool> seen(n, false);
  for (NodeId p : perm) {
    if (p >= n || seen[p])
      throw InvalidPermutation("not a bijection on [0, " + std::to_string(n) + ")");
    seen[p] = true;
  }

  std::vector<Edge> edges;
  edges.reserve(dag.num_edges());
  for (const Edge& e : dag.edges()) edges.push_back({perm[e.tail], perm[e.head], e.edge_type});

  DenseArray features = DenseArray::zeros(n, dag.feature_dim());
  for (NodeId v = 0; v < n; ++v) {
    const auto row = dag.feature(v);
    for (std::size_t j = 0; j < row.size(); ++j) features(perm[v], j) = row[j];
  }
  return Dag::build(n, std::move(edges), std::move(features));
}

Dag disjoint_union(std::span<const Dag* const> graphs) {
  if (graphs.empty()) throw EmptyInput("disjoint_union: no graphs");
  const std::size_t dim = graphs.front()->feature_dim();
  std::size_t total = 0;
  std::size_t total_edges = 0;
  for (const Dag* g : graphs) {
    if (g->feature_dim() != dim)
      throw DimensionError("disjoint_union: feature dimensions differ");
    total += g->num_nodes();
    total_edges += g->num_edges();
  }

  std::vector<Edge> edges;
  edges.reserve(total_edges);
  DenseArray features = DenseArray::zeros(total, dim);
  std::size_t offset = 0;
  for (const Dag* g : graphs) {
    for (const Edge& e : g->edges())
      edges.push_back({static_cast<NodeId>(e.tail + offset),
                       static_cast<NodeId>(e.head + offset), e.edge_type});
    for (NodeId v = 0; v < g->num_nodes(); ++v) {
      const auto row = g->feature(v);
      for (std::size_t j = 0; j < dim; ++j) features(offset + v, j) = row[j];
    }
    offset += g->num_nodes();
  }
  return Dag::build(total, std::move(edges), std::move(features));
}

Dag disjoint_union(std::span<const Dag> graphs) {
  std::vector<const Dag*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Dag& g : graphs) ptrs.push_back(&g);
  return disjoint_union(std::span<const Dag* const>(ptrs));
}

}  // namespace dagnn
