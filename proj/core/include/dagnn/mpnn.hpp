#pragma once

#include <cstdint>
#include <vector>

#include "dagnn/model.hpp"

namespace dagnn {

struct MpnnConfig {
  int num_layers = 2;
  int hidden_dim = 32;
  int input_dim = 0;
  OutputKind output = OutputKind::classification;
  int output_dim = 1;

  void validate() const;
};

// Minimal message-passing baseline: each layer aggregates the past-layer
// mean over the undirected neighborhood, h_v = tanh(W1 h_v + W2 mean + b);
// the readout mean-pools the last layer over all nodes. Information travels
// at most one hop per layer, the contrast to partial-order processing.
class MpnnModel final : public GraphModel {
 public:
  MpnnModel(MpnnConfig config, std::uint64_t seed);

  const MpnnConfig& config() const { return config_; }

  std::string kind() const override { return "mpnn"; }
  OutputKind output_kind() const override { return config_.output; }
  int output_dim() const override { return config_.output_dim; }
  int input_dim() const override { return config_.input_dim; }
  ParamSet& params() override { return set_; }
  const ParamSet& params() const override { return set_; }

  std::vector<Value> forward_batch(Tape& tape, std::span<const Value> leaves,
                                   std::span<const Dag* const> graphs) const override;

  // Per-layer node states, exposed for the information-flow contrast tests.
  std::vector<std::vector<Value>> node_states(Tape& tape, std::span<const Value> leaves,
                                              const Dag& dag) const;

 private:
  struct LayerIdx {
    int W1 = -1, W2 = -1, b = -1;
  };

  MpnnConfig config_;
  ParamSet set_;
  int input_W_ = -1, input_b_ = -1;
  std::vector<LayerIdx> layers_;
  int readout_W_ = -1, readout_b_ = -1;
};

}  // namespace dagnn
