#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagnn/dag.hpp"
#include "dagnn/params.hpp"
#include "dagnn/tape.hpp"
#include "dagnn/topo_batches.hpp"

namespace dagnn {

enum class Aggregator { attention, attention_edge, gated_sum };
enum class Combiner { gru, fully_connected };
enum class ReadoutScope { targets_only, all_nodes };
enum class OutputKind { classification, regression };

std::string to_string(Aggregator a);
std::string to_string(Combiner c);
std::string to_string(ReadoutScope r);
std::string to_string(OutputKind k);
Aggregator parse_aggregator(std::string_view s);
Combiner parse_combiner(std::string_view s);
ReadoutScope parse_readout_scope(std::string_view s);
OutputKind parse_output_kind(std::string_view s);

struct DagnnConfig {
  int num_layers = 2;
  int hidden_dim = 32;
  int input_dim = 0;
  int num_edge_types = 1;
  bool bidirectional = false;
  Aggregator aggregator = Aggregator::attention_edge;
  Combiner combiner = Combiner::gru;
  ReadoutScope readout_scope = ReadoutScope::targets_only;
  OutputKind output = OutputKind::classification;
  int output_dim = 1;  // class count, or 1 for regression

  void validate() const;
};

// Parameter indices into a ParamSet; -1 marks fields the configuration does
// not use. Matrix convention is (out x in), applied as matvec(W, x).
struct GruIdx {
  int Wz = -1, Uz = -1, bz = -1;
  int Wr = -1, Ur = -1, br = -1;
  int Wn = -1, Un = -1, bn = -1;
};

struct LayerIdx {
  int w1 = -1, w2 = -1;                          // attention vectors
  GruIdx gru;                                    // gru combiner
  int fc_W = -1, fc_b = -1;                      // fully-connected combiner
  int gs_Wg = -1, gs_bg = -1, gs_Wm = -1, gs_bm = -1;  // gated-sum aggregator
};

struct DirectionIdx {
  std::vector<LayerIdx> layers;  // one per layer, 1-based names
  int edge_emb = -1;             // num_edge_types x d, attention_edge only
};

struct DagnnParams {
  int input_W = -1, input_b = -1;
  DirectionIdx fwd;
  DirectionIdx rev;  // populated only when bidirectional
  int readout_W = -1, readout_b = -1;
};

// ---- layer building blocks --------------------------------------------

struct PredState {
  Value h;
  int edge_type = 0;
};

struct BoundGru {
  Value Wz, Uz, bz, Wr, Ur, br, Wn, Un, bn;
};

// Additive attention over current-layer predecessor states with the node's
// previous-layer state as query; logits w1.q + w2.h_u, plus w1.y_type when
// edge_emb is given (the tied-w3 form). Empty predecessor set gives the zero
// message.
Value aggregate_attention(Tape& tape, Value h_prev, std::span<const PredState> preds,
                          Value w1, Value w2, const Value* edge_emb, int hidden_dim);

// Gated sum: sum of sigmoid(Wg.h_u + bg) * (Wm.h_u + bm). Ignores the query
// by construction; empty predecessor set gives the zero message.
Value aggregate_gated_sum(Tape& tape, std::span<const PredState> preds, Value Wg,
                          Value bg, Value Wm, Value bm, int hidden_dim);

// GRU cell with the previous node state as input and the message as state:
// z = s(Wz x + Uz s + bz), r = s(Wr x + Ur s + br),
// n = tanh(Wn x + Un (r*s) + bn), out = (1-z)*n + z*s.
Value combine_gru(Value x, Value s, const BoundGru& g);

// tanh(W [x || m] + b)
Value combine_fc(Value x, Value m, Value W, Value b);

// Node states per layer: h[layer][node], layer in 0..L. h[0] is the shared
// projected input.
struct NodeStates {
  std::vector<std::vector<Value>> h;
};

// Runs L layers over the given graph in batch order. The graph must be the
// direction-appropriate one (pass the reversed graph for the reverse
// direction); its batches must match. Within a layer, messages aggregate
// current-layer predecessor states, which batching guarantees are ready.
NodeStates forward_direction(Tape& tape, const Dag& graph, const TopoBatches& batches,
                             std::span<const Value> leaves, const DirectionIdx& dir,
                             const DagnnConfig& config, const std::vector<Value>& h0);

// Max-pool of per-node all-layer concatenations over the pooled node sets
// (targets/sources, or all nodes), then the readout projection.
Value readout(Tape& tape, const NodeStates& states, const NodeStates* rev_states,
              const Dag& dag, std::span<const Value> leaves, const DagnnParams& idx,
              const DagnnConfig& config);

// ---- models ------------------------------------------------------------

class GraphModel {
 public:
  virtual ~GraphModel() = default;

  virtual std::string kind() const = 0;
  virtual OutputKind output_kind() const = 0;
  virtual int output_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual ParamSet& params() = 0;
  virtual const ParamSet& params() const = 0;

  // One output per graph: a vector of class logits, or a scalar. The
  // gradient of anything derived from the outputs reaches the bound leaves.
  virtual std::vector<Value> forward_batch(Tape& tape, std::span<const Value> leaves,
                                           std::span<const Dag* const> graphs) const = 0;

  Value forward_single(Tape& tape, std::span<const Value> leaves, const Dag& dag) const;
};

class DagnnModel final : public GraphModel {
 public:
  DagnnModel(DagnnConfig config, std::uint64_t seed);

  const DagnnConfig& config() const { return config_; }
  const DagnnParams& param_index() const { return idx_; }

  std::string kind() const override { return "dagnn"; }
  OutputKind output_kind() const override { return config_.output; }
  int output_dim() const override { return config_.output_dim; }
  int input_dim() const override { return config_.input_dim; }
  ParamSet& params() override { return set_; }
  const ParamSet& params() const override { return set_; }

  std::vector<Value> forward_batch(Tape& tape, std::span<const Value> leaves,
                                   std::span<const Dag* const> graphs) const override;

 private:
  DagnnConfig config_;
  ParamSet set_;
  DagnnParams idx_;
};

}  // namespace dagnn
