#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dagnn/dag.hpp"

namespace dagnn {

// Ordered partition of a DAG's nodes into batches with no intra-batch
// dependency. Batches must be processed in order; nodes within one batch
// have no path between them and may be processed in any order or in
// parallel. The batch count equals the node count of the longest path.
struct TopoBatches {
  std::vector<std::vector<NodeId>> batches;  // each batch ascending by id
  std::vector<std::size_t> node_batch;       // batch index per node

  std::size_t num_batches() const { return batches.size(); }

  std::size_t max_width() const {
    std::size_t w = 0;
    for (const auto& b : batches) w = std::max(w, b.size());
    return w;
  }
};

// Peeling partition: batch 0 is the source set; each following batch is the
// set of nodes whose in-degree reaches zero once the previous batch and its
// outgoing edges are removed.
TopoBatches compute_batches(const Dag& dag);

// compute_batches on the edge-reversed graph; the first batch is the
// target set of the original graph.
TopoBatches compute_batches_reverse(const Dag& dag);

// Batches of the disjoint union: batch i is the union of batch i of every
// graph, with node ids offset into the union's index space. Equal to
// compute_batches(disjoint_union(graphs)). Throws EmptyInput on an empty
// list.
TopoBatches merge_batches(std::span<const Dag* const> graphs);
TopoBatches merge_batches(std::span<const Dag> graphs);

}  // namespace dagnn
