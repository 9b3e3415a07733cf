#include "dagnn/topo_batches.hpp"

#include <algorithm>

namespace dagnn {

TopoBatches compute_batches(const Dag& dag) {
  const std::size_t n = dag.num_nodes();
  std::vector<std::size_t> indegree(n);
  for (NodeId v = 0; v < n; ++v) indegree[v] = dag.predecessors(v).size();

  TopoBatches out;
  out.node_batch.assign(n, 0);

  std::vector<NodeId> frontier;
  for (NodeId v = 0; v < n; ++v)
    if (indegree[v] == 0) frontier.push_back(v);

  while (!frontier.empty()) {
    const std::size_t index = out.batches.size();
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      out.node_batch[u] = index;
      for (NodeId w : dag.successors(u))
        if (--indegree[w] == 0) next.push_back(w);
    }
    std::sort(next.begin(), next.end());
    out.batches.push_back(std::move(frontier));
    frontier = std::move(next);
  }
  return out;
}

TopoBatches compute_batches_reverse(const Dag& dag) {
  return compute_batches(reverse(dag));
}

TopoBatches merge_batches(std::span<const Dag* const> graphs) {
  if (graphs.empty()) throw EmptyInput("merge_batches: no graphs");

  TopoBatches merged;
  std::size_t total_nodes = 0;
  for (const Dag* g : graphs) total_nodes += g->num_nodes();
  merged.node_batch.assign(total_nodes, 0);

  std::size_t offset = 0;
  for (const Dag* g : graphs) {
    const TopoBatches local = compute_batches(*g);
    if (local.num_batches() > merged.num_batches())
      merged.batches.resize(local.num_batches());
    for (std::size_t i = 0; i < local.num_batches(); ++i) {
      for (NodeId v : local.batches[i]) {
        const NodeId shifted = static_cast<NodeId>(v + offset);
        merged.batches[i].push_back(shifted);
        merged.node_batch[shifted] = i;
      }
    }
    offset += g->num_nodes();
  }
  return merged;
}

TopoBatches merge_batches(std::span<const Dag> graphs) {
  std::vector<const Dag*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Dag& g : graphs) ptrs.push_back(&g);
  return merge_batches(std::span<const Dag* const>(ptrs));
}

}  // namespace dagnn
