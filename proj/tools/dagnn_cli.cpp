// dagnn command line: dataset generation, batching inspection, gradient
// checking, training, evaluation, and the ablation grid.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dagnn/checkpoint.hpp"
#include "dagnn/dataset.hpp"
#include "dagnn/errors.hpp"
#include "dagnn/metrics.hpp"
#include "dagnn/model.hpp"
#include "dagnn/mpnn.hpp"
#include "dagnn/params.hpp"
#include "dagnn/rng.hpp"
#include "dagnn/topo_batches.hpp"
#include "dagnn/train.hpp"

namespace {

using namespace dagnn;

struct GeneratorFlags {
  std::string task = "lp";
  int count = 1000;
  std::uint64_t seed = 1;
  std::string out;
  int n_min = 4;
  int n_max = 15;
  double edge_prob = 0.35;
  int edge_types = 2;
  std::string features = "onehot_indegree";
};

void add_generate(CLI::App& app) {
  auto flags = std::make_shared<GeneratorFlags>();
  CLI::App* cmd = app.add_subcommand("generate", "Generate a synthetic DAG dataset");
  cmd->add_option("--task", flags->task, "lp or score")
      ->check(CLI::IsMember({"lp", "score"}));
  cmd->add_option("--count", flags->count, "number of samples")->required();
  cmd->add_option("--seed", flags->seed, "generator seed");
  cmd->add_option("--out", flags->out, "output JSONL path")->required();
  cmd->add_option("--n-min", flags->n_min, "minimum node count");
  cmd->add_option("--n-max", flags->n_max, "maximum node count");
  cmd->add_option("--edge-prob", flags->edge_prob, "edge probability");
  cmd->add_option("--edge-types", flags->edge_types, "number of edge types");
  cmd->add_option("--features", flags->features,
                  "onehot_indegree, random, or onehot_topoindex");

  cmd->callback([flags] {
    GenParams params;
    params.n_min = flags->n_min;
    params.n_max = flags->n_max;
    params.edge_prob = flags->edge_prob;
    params.num_edge_types = flags->edge_types;
    params.feature_mode = parse_feature_mode(flags->features);

    const Task task = parse_task(flags->task);
    const auto samples = task == Task::lp
                             ? gen_lp_dataset(flags->count, params, flags->seed)
                             : gen_score_dataset(flags->count, params, flags->seed);
    save_jsonl(samples, flags->out);

    if (task == Task::lp) {
      const auto hist = label_histogram(samples);
      const std::filesystem::path hist_path = flags->out + ".hist.csv";
      std::ofstream file(hist_path);
      if (!file) throw IoError("cannot open " + hist_path.string() + " for writing");
      file << "label,count\n";
      for (const auto& [label, count] : hist) file << label << ',' << count << '\n';
    }
    std::cout << "wrote " << samples.size() << " samples to " << flags->out << '\n';
  });
}

void add_batch_info(CLI::App& app) {
  auto path = std::make_shared<std::string>();
  CLI::App* cmd =
      app.add_subcommand("batch-info", "Per-graph batching statistics as CSV");
  cmd->add_option("dataset", *path, "JSONL dataset path")->required();
  cmd->callback([path] {
    const auto samples = load_jsonl(*path);
    std::cout << "nodes,edges,batches,longest_path_nodes,max_batch_width\n";
    for (const Sample& s : samples) {
      const TopoBatches batches = compute_batches(s.dag);
      std::cout << s.dag.num_nodes() << ',' << s.dag.num_edges() << ','
                << batches.num_batches() << ',' << longest_path_node_count(s.dag) << ','
                << batches.max_width() << '\n';
    }
  });
}

void add_gradcheck(CLI::App& app) {
  auto seed = std::make_shared<std::uint64_t>(1);
  CLI::App* cmd = app.add_subcommand(
      "gradcheck", "Finite-difference check of the full model gradient");
  cmd->add_option("--seed", *seed, "seed for the probe graph and parameters");
  cmd->callback([seed] {
    Rng rng(*seed ^ 0x5eedULL);
    GenParams gen;
    gen.n_min = 4;
    gen.n_max = 7;
    gen.num_edge_types = 2;
    const Dag dag = gen_random_dag(gen, rng);

    DagnnConfig config;
    config.num_layers = 2;
    config.hidden_dim = 3;
    config.input_dim = static_cast<int>(dag.feature_dim());
    config.num_edge_types = 2;
    config.bidirectional = true;
    config.output = OutputKind::classification;
    config.output_dim = 3;
    const DagnnModel model(config, *seed);

    // conditioned as in the acceptance suite: the 1e-3 factor keeps
    // near-zero gradient coordinates below the relative-error floor
    const TapeProgram program = [&](Tape& tape, const std::vector<Value>& leaves) {
      return scale_const(
          cross_entropy_loss(tape, model.forward_single(tape, leaves, dag), 0), 1e-3);
    };
    const double err = grad_check(program, model.params().snapshot(), 1e-5);
    std::cout << "max_relative_error," << format_double(err) << '\n';
  });
}

struct TrainFlags {
  std::string task = "lp";
  std::string model = "dagnn";
  std::string data;
  std::string val;
  std::string out;
  std::string log;
  int layers = 2;
  bool bidirectional = false;
  std::string aggregator = "attention_edge";
  std::string combiner = "gru";
  std::string readout = "targets";
  int hidden = 32;
  int edge_types = 2;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  int epochs = 100;
  int patience = 10;
  int batch_size = 32;
  double clip = 0.25;
};

void add_train_flags(CLI::App* cmd, const std::shared_ptr<TrainFlags>& f,
                     bool with_model_axes) {
  cmd->add_option("--task", f->task, "lp or score")->check(CLI::IsMember({"lp", "score"}));
  cmd->add_option("--data", f->data, "training JSONL")->required();
  cmd->add_option("--val", f->val, "validation JSONL (enables early stopping)");
  cmd->add_option("--lr", f->lr, "learning rate");
  cmd->add_option("--seed", f->seed, "training / initialization seed");
  cmd->add_option("--epochs", f->epochs, "maximum epochs");
  cmd->add_option("--patience", f->patience, "early-stopping patience");
  cmd->add_option("--batch-size", f->batch_size, "data batch size");
  cmd->add_option("--clip", f->clip, "gradient max-norm clip");
  cmd->add_option("--hidden", f->hidden, "hidden dimension");
  cmd->add_option("--edge-types", f->edge_types, "edge embedding table size");
  if (with_model_axes) {
    cmd->add_option("--model", f->model, "dagnn or mpnn")
        ->check(CLI::IsMember({"dagnn", "mpnn"}));
    cmd->add_option("--layers", f->layers, "number of layers");
    cmd->add_flag("--bidirectional", f->bidirectional, "process both edge directions");
    cmd->add_option("--aggregator", f->aggregator,
                    "attention, attention_edge, or gated_sum")
        ->check(CLI::IsMember({"attention", "attention_edge", "gated_sum"}));
    cmd->add_option("--combiner", f->combiner, "gru or fc")
        ->check(CLI::IsMember({"gru", "fc"}));
    cmd->add_option("--readout", f->readout, "targets or all")
        ->check(CLI::IsMember({"targets", "all"}));
  }
}

DagnnConfig dagnn_config_from_flags(const TrainFlags& f, int input_dim, Task task) {
  DagnnConfig config;
  config.num_layers = f.layers;
  config.hidden_dim = f.hidden;
  config.input_dim = input_dim;
  config.num_edge_types = f.edge_types;
  config.bidirectional = f.bidirectional;
  config.aggregator = parse_aggregator(f.aggregator);
  config.combiner = parse_combiner(f.combiner);
  config.readout_scope = parse_readout_scope(f.readout);
  if (task == Task::lp) {
    config.output = OutputKind::classification;
    config.output_dim = input_dim;  // classes = n_max = feature dimension
  } else {
    config.output = OutputKind::regression;
    config.output_dim = 1;
  }
  return config;
}

void check_labels(const std::vector<Sample>& samples, Task task, int classes) {
  if (task != Task::lp) return;
  for (const Sample& s : samples) {
    const long label = std::llround(s.label);
    if (label < 0 || label >= classes)
      throw Error("label " + std::to_string(label) + " outside [0, " +
                  std::to_string(classes) + "); was the dataset generated for lp?");
  }
}

void add_train(CLI::App& app) {
  auto flags = std::make_shared<TrainFlags>();
  CLI::App* cmd = app.add_subcommand("train", "Train a model and save a checkpoint");
  add_train_flags(cmd, flags, true);
  cmd->add_option("--out", flags->out, "checkpoint output path");
  cmd->add_option("--log", flags->log, "epoch log CSV path");

  cmd->callback([flags] {
    const Task task = parse_task(flags->task);
    const auto train_set = load_jsonl(flags->data);
    if (train_set.empty()) throw EmptyInput("train: empty dataset " + flags->data);
    std::vector<Sample> val_set;
    if (!flags->val.empty()) val_set = load_jsonl(flags->val);

    const int input_dim = static_cast<int>(train_set.front().dag.feature_dim());

    std::unique_ptr<GraphModel> model;
    if (flags->model == "dagnn") {
      model = std::make_unique<DagnnModel>(dagnn_config_from_flags(*flags, input_dim, task),
                                           flags->seed);
    } else {
      MpnnConfig config;
      config.num_layers = flags->layers;
      config.hidden_dim = flags->hidden;
      config.input_dim = input_dim;
      config.output = task == Task::lp ? OutputKind::classification : OutputKind::regression;
      config.output_dim = task == Task::lp ? input_dim : 1;
      model = std::make_unique<MpnnModel>(config, flags->seed);
    }
    check_labels(train_set, task, model->output_dim());
    check_labels(val_set, task, model->output_dim());

    TrainConfig tc;
    tc.learning_rate = flags->lr;
    tc.max_epochs = flags->epochs;
    tc.patience = flags->patience;
    tc.grad_clip = flags->clip;
    tc.data_batch_size = flags->batch_size;
    tc.seed = flags->seed;

    const TrainResult result = train(*model, train_set, val_set, task, tc);

    if (!flags->log.empty()) write_history_csv(flags->log, result.history, task);
    if (!flags->out.empty()) save_checkpoint(*model, flags->out);

    std::cout << "epochs_run,best_epoch,best_val_metric,final_train_loss\n"
              << result.history.size() << ',' << result.best_epoch << ','
              << format_double(result.best_val) << ','
              << format_double(result.history.back().train_loss) << '\n';
  });
}

void add_eval(CLI::App& app) {
  auto ckpt = std::make_shared<std::string>();
  auto data = std::make_shared<std::string>();
  CLI::App* cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  cmd->add_option("--ckpt", *ckpt, "checkpoint path")->required();
  cmd->add_option("--data", *data, "JSONL dataset path")->required();
  cmd->callback([ckpt, data] {
    const auto model = load_checkpoint(*ckpt);
    const auto samples = load_jsonl(*data);
    const Task task =
        model->output_kind() == OutputKind::classification ? Task::lp : Task::score;
    const Metrics metrics = evaluate(*model, samples, task);
    if (task == Task::lp) {
      std::cout << "accuracy\n" << format_double(*metrics.accuracy) << '\n';
    } else {
      std::cout << "rmse,pearson_r\n"
                << format_double(*metrics.rmse) << ','
                << (metrics.pearson_r ? format_double(*metrics.pearson_r) : "undefined")
                << '\n';
    }
  });
}

void add_ablate(CLI::App& app) {
  auto flags = std::make_shared<TrainFlags>();
  auto test_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto seeds = std::make_shared<std::vector<std::uint64_t>>();
  CLI::App* cmd =
      app.add_subcommand("ablate", "Train and evaluate the ablation grid");
  add_train_flags(cmd, flags, false);
  cmd->add_option("--test", *test_path, "test JSONL (defaults to a split of --data)");
  cmd->add_option("--out", *out_path, "results CSV path")->required();
  cmd->add_option("--seeds", *seeds, "training seeds (default 1 2 3)");

  cmd->callback([flags, test_path, out_path, seeds] {
    const Task task = parse_task(flags->task);
    auto all = load_jsonl(flags->data);
    if (all.empty()) throw EmptyInput("ablate: empty dataset " + flags->data);

    std::vector<Sample> train_set, val_set, test_set;
    if (flags->val.empty() != test_path->empty())
      throw Error("ablate: pass both --val and --test, or neither");
    if (!flags->val.empty()) {
      train_set = std::move(all);
      val_set = load_jsonl(flags->val);
      test_set = load_jsonl(*test_path);
    } else {
      // deterministic 70/15/15 split in file order
      const std::size_t n = all.size();
      const std::size_t train_end = n * 70 / 100;
      const std::size_t val_end = train_end + n * 15 / 100;
      train_set.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(train_end));
      val_set.assign(all.begin() + static_cast<std::ptrdiff_t>(train_end),
                     all.begin() + static_cast<std::ptrdiff_t>(val_end));
      test_set.assign(all.begin() + static_cast<std::ptrdiff_t>(val_end), all.end());
    }
    if (train_set.empty() || test_set.empty())
      throw EmptyInput("ablate: not enough data to split");

    const int input_dim = static_cast<int>(train_set.front().dag.feature_dim());
    TrainFlags base_flags = *flags;
    base_flags.layers = 2;
    const DagnnConfig base = dagnn_config_from_flags(base_flags, input_dim, task);
    check_labels(train_set, task, base.output_dim);

    TrainConfig tc;
    tc.learning_rate = flags->lr;
    tc.max_epochs = flags->epochs;
    tc.patience = flags->patience;
    tc.grad_clip = flags->clip;
    tc.data_batch_size = flags->batch_size;

    std::vector<std::uint64_t> seed_list = *seeds;
    if (seed_list.empty()) seed_list = {1, 2, 3};

    const auto rows =
        run_ablation_grid(train_set, val_set, test_set, task, base, tc, seed_list);
    const std::string csv = ablation_csv(rows, task);

    std::ofstream file(*out_path);
    if (!file) throw IoError("cannot open " + *out_path + " for writing");
    file << csv;
    file.close();
    std::cout << csv;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DAG neural network workbench"};
  app.require_subcommand(1);
  add_generate(app);
  add_batch_info(app);
  add_gradcheck(app);
  add_train(app);
  add_eval(app);
  add_ablate(app);

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const dagnn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
