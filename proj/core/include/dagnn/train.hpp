#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dagnn/dataset.hpp"
#include "dagnn/metrics.hpp"
#include "dagnn/model.hpp"

namespace dagnn {

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_epochs = 100;
  int patience = 10;       // early stopping on the validation metric
  double grad_clip = 0.25;  // global max-norm; <= 0 disables clipping
  int data_batch_size = 32;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;            // 1-based
  double train_loss = 0.0;  // mean per-sample loss over the epoch
  double val_metric = 0.0;  // accuracy (lp) or rmse (score); NaN without a val set
};

struct TrainResult {
  std::vector<EpochLog> history;
  int best_epoch = 0;  // epoch whose parameters the model ends up holding
  double best_val = 0.0;
  bool stopped_early = false;
};

// ---- losses (tape ops, exposed for unit tests) -------------------------

// log-sum-exp(logits) - logits[label]
Value cross_entropy_loss(Tape& tape, Value logits, int label);
// (prediction - target)^2
Value squared_error_loss(Tape& tape, Value prediction, double target);

// ---- optimizer ----------------------------------------------------------

struct AdamState {
  std::vector<DenseArray> m, v;
  long step = 0;
};

// Scales all gradients by max_norm / ||g||_2 when the global norm exceeds
// max_norm. No-op for max_norm <= 0.
void clip_global_norm(std::vector<DenseArray>& grads, double max_norm);

// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8 and bias correction.
void adam_step(ParamSet& params, std::span<const DenseArray> grads, AdamState& state,
               double learning_rate);

// ---- training loop -------------------------------------------------------

// Minimizes cross-entropy (lp) or mean squared error (score) with Adam.
// Each optimizer step runs one data batch as a single merge-batched forward
// over the disjoint union. With a validation set, stops early after
// `patience` epochs without improvement and restores the best parameters;
// without one, runs to max_epochs and keeps the final parameters. Throws
// NonFiniteLoss naming the epoch and step if the loss leaves the reals.
TrainResult train(GraphModel& model, std::span<const Sample> train_set,
                  std::span<const Sample> val_set, Task task, const TrainConfig& config);

// Deterministic CSV: epoch,train_loss,val_metric with round-trippable
// doubles. Identical flags and seed give a byte-identical file.
void write_history_csv(const std::filesystem::path& path,
                       std::span<const EpochLog> history, Task task);

// shortest string that parses back to exactly the same double
std::string format_double(double v);

// ---- ablation grid -------------------------------------------------------

struct AblationResult {
  std::string name;
  std::string description;
  std::vector<double> primary;  // per-seed accuracy (lp) or rmse (score)
  std::vector<double> pearson;  // per-seed, score only
  double primary_mean = 0.0, primary_std = 0.0;
  double pearson_mean = 0.0, pearson_std = 0.0;
};

// The deduplicated configuration grid around `base`: full model, gated-sum
// aggregation, 1..4 layers, fully-connected combiner, all-node pooling,
// attention without edge terms, and flipped direction handling.
std::vector<std::pair<std::string, DagnnConfig>> ablation_grid(const DagnnConfig& base);

// Trains and evaluates every ablation_grid configuration; one row per
// configuration with mean and std over the seed set.
std::vector<AblationResult> run_ablation_grid(std::span<const Sample> train_set,
                                              std::span<const Sample> val_set,
                                              std::span<const Sample> test_set, Task task,
                                              const DagnnConfig& base,
                                              const TrainConfig& train_config,
                                              std::span<const std::uint64_t> seeds);

std::string ablation_csv(std::span<const AblationResult> rows, Task task);

std::string describe(const DagnnConfig& config);

}  // namespace dagnn
