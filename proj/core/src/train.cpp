#include "dagnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dagnn/errors.hpp"
#include "dagnn/params.hpp"
#include "dagnn/rng.hpp"

namespace dagnn {

void TrainConfig::validate() const {
  // learning_rate 0 is allowed: it must leave the parameters untouched
  if (learning_rate < 0) throw Error("train: learning_rate must be >= 0");
  if (max_epochs < 1) throw Error("train: max_epochs must be >= 1");
  if (patience < 1) throw Error("train: patience must be >= 1");
  if (data_batch_size < 1) throw Error("train: data_batch_size must be >= 1");
}

Value cross_entropy_loss(Tape& tape, Value logits, int label) {
  (void)tape;
  if (label < 0 || static_cast<std::size_t>(label) >= logits.val().size())
    throw Error("cross_entropy_loss: label " + std::to_string(label) +
                " outside [0, " + std::to_string(logits.val().size()) + ")");
  return sub(log_sum_exp(logits), slice(logits, static_cast<std::size_t>(label), 1));
}

Value squared_error_loss(Tape& tape, Value prediction, double target) {
  const Value diff = sub(prediction, tape.input(DenseArray::scalar(target)));
  return mul(diff, diff);
}

void clip_global_norm(std::vector<DenseArray>& grads, double max_norm) {
  if (max_norm <= 0) return;
  double sq = 0.0;
  for (const DenseArray& g : grads)
    for (std::size_t i = 0; i < g.size(); ++i) sq += g[i] * g[i];
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double factor = max_norm / norm;
  for (DenseArray& g : grads)
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= factor;
}

void adam_step(ParamSet& params, std::span<const DenseArray> grads, AdamState& state,
               double learning_rate) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (state.m.empty()) {
    for (std::size_t p = 0; p < params.count(); ++p) {
      const DenseArray& a = params.array(static_cast<int>(p));
      state.m.push_back(DenseArray::zeros(a.rows(), a.cols()));
      state.v.push_back(DenseArray::zeros(a.rows(), a.cols()));
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.count(); ++p) {
    DenseArray& theta = params.array(static_cast<int>(p));
    const DenseArray& g = grads[p];
    DenseArray& m = state.m[p];
    DenseArray& v = state.v[p];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

namespace {

double validation_metric(const GraphModel& model, std::span<const Sample> val, Task task) {
  const Metrics m = evaluate(model, val, task);
  return task == Task::lp ? *m.accuracy : *m.rmse;
}

bool improved(Task task, double candidate, double best) {
  return task == Task::lp ? candidate > best : candidate < best;
}

}  // namespace

TrainResult train(GraphModel& model, std::span<const Sample> train_set,
                  std::span<const Sample> val_set, Task task, const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw EmptyInput("train: empty training set");

  Rng rng(config.seed);
  AdamState adam;
  TrainResult result;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const bool has_val = !val_set.empty();
  double best = task == Task::lp ? -std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::infinity();
  std::vector<DenseArray> best_params = model.params().snapshot();
  int since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Fisher-Yates with the local generator
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);

    double loss_sum = 0.0;
    const std::size_t batch_size = static_cast<std::size_t>(config.data_batch_size);
    for (std::size_t begin = 0, step = 0; begin < order.size();
         begin += batch_size, ++step) {
      const std::size_t end = std::min(order.size(), begin + batch_size);

      std::vector<const Dag*> graphs;
      graphs.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) graphs.push_back(&train_set[order[i]].dag);

      Tape tape;
      const auto leaves = bind_params(tape, model.params());
      const auto outputs = model.forward_batch(tape, leaves, graphs);

      Value total;
      for (std::size_t i = begin; i < end; ++i) {
        const Sample& sample = train_set[order[i]];
        const Value sample_loss =
            task == Task::lp
                ? cross_entropy_loss(tape, outputs[i - begin],
                                     static_cast<int>(std::llround(sample.label)))
                : squared_error_loss(tape, outputs[i - begin], sample.label);
        total = i == begin ? sample_loss : add(total, sample_loss);
      }
      const double count = static_cast<double>(end - begin);
      const Value batch_loss = scale_const(total, 1.0 / count);

      const double loss_value = batch_loss.val()[0];
      if (!std::isfinite(loss_value))
        throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(step));
      loss_sum += loss_value * count;

      tape.backward(batch_loss);
      auto grads = collect_grads(leaves);
      clip_global_norm(grads, config.grad_clip);
      adam_step(model.params(), grads, adam, config.learning_rate);
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(train_set.size());
    log.val_metric = std::numeric_limits<double>::quiet_NaN();

    if (has_val) {
      log.val_metric = validation_metric(model, val_set, task);
      if (improved(task, log.val_metric, best)) {
        best = log.val_metric;
        best_params = model.params().snapshot();
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.history.push_back(log);

    if (has_val && since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }

  if (has_val) {
    model.params().restore(best_params);
    result.best_val = best;
  } else {
    result.best_epoch = static_cast<int>(result.history.size());
    result.best_val = result.history.empty() ? 0.0 : result.history.back().train_loss;
  }
  return result;
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void write_history_csv(const std::filesystem::path& path,
                       std::span<const EpochLog> history, Task task) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << "epoch,train_loss," << (task == Task::lp ? "val_accuracy" : "val_rmse") << '\n';
  for (const EpochLog& log : history)
    file << log.epoch << ',' << format_double(log.train_loss) << ','
         << format_double(log.val_metric) << '\n';
  if (!file) throw IoError("failed writing " + path.string());
}

std::string describe(const DagnnConfig& config) {
  return "L=" + std::to_string(config.num_layers) +
         (config.bidirectional ? " bi " : " uni ") + to_string(config.aggregator) + " " +
         to_string(config.combiner) + " " + to_string(config.readout_scope);
}

std::vector<std::pair<std::string, DagnnConfig>> ablation_grid(const DagnnConfig& base) {
  std::vector<std::pair<std::string, DagnnConfig>> grid;
  const auto push = [&](const std::string& name, DagnnConfig config) {
    for (const auto& [_, existing] : grid)
      if (describe(existing) == describe(config)) return;  // deduplicate
    grid.emplace_back(name, config);
  };

  push("full", base);
  {
    DagnnConfig c = base;
    c.aggregator = Aggregator::gated_sum;
    push("gated_sum", c);
  }
  for (int layers = 1; layers <= 4; ++layers) {
    DagnnConfig c = base;
    c.num_layers = layers;
    push("layers_" + std::to_string(layers), c);
  }
  {
    DagnnConfig c = base;
    c.combiner = Combiner::fully_connected;
    push("fc_combiner", c);
  }
  {
    DagnnConfig c = base;
    c.readout_scope = ReadoutScope::all_nodes;
    push("pool_all_nodes", c);
  }
  {
    DagnnConfig c = base;
    c.aggregator = Aggregator::attention;
    push("no_edge_attr", c);
  }
  {
    DagnnConfig c = base;
    c.bidirectional = !base.bidirectional;
    push(base.bidirectional ? "unidirectional" : "bidirectional", c);
  }
  return grid;
}

std::vector<AblationResult> run_ablation_grid(std::span<const Sample> train_set,
                                              std::span<const Sample> val_set,
                                              std::span<const Sample> test_set, Task task,
                                              const DagnnConfig& base,
                                              const TrainConfig& train_config,
                                              std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw EmptyInput("run_ablation_grid: no seeds");

  const auto grid = ablation_grid(base);
  std::vector<AblationResult> rows;
  for (const auto& [name, config] : grid) {
    AblationResult row;
    row.name = name;
    row.description = describe(config);
    for (const std::uint64_t seed : seeds) {
      DagnnModel model(config, seed);
      TrainConfig tc = train_config;
      tc.seed = seed;
      train(model, train_set, val_set, task, tc);
      const Metrics m = evaluate(model, test_set, task);
      if (task == Task::lp) {
        row.primary.push_back(*m.accuracy);
      } else {
        row.primary.push_back(*m.rmse);
        row.pearson.push_back(m.pearson_r.value_or(
            std::numeric_limits<double>::quiet_NaN()));
      }
    }
    const auto mean_std = [](std::span<const double> xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(xs.size());
      return std::make_pair(mean, std::sqrt(var));
    };
    std::tie(row.primary_mean, row.primary_std) = mean_std(row.primary);
    if (!row.pearson.empty())
      std::tie(row.pearson_mean, row.pearson_std) = mean_std(row.pearson);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(std::span<const AblationResult> rows, Task task) {
  std::string out = task == Task::lp
                        ? "name,config,seeds,accuracy_mean,accuracy_std\n"
                        : "name,config,seeds,rmse_mean,rmse_std,pearson_mean,pearson_std\n";
  for (const AblationResult& row : rows) {
    out += row.name + "," + row.description + "," + std::to_string(row.primary.size()) +
           "," + format_double(row.primary_mean) + "," + format_double(row.primary_std);
    if (task == Task::score)
      out += "," + format_double(row.pearson_mean) + "," + format_double(row.pearson_std);
    out += "\n";
  }
  return out;
}

}  // namespace dagnn
