#include "dagnn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "dagnn/errors.hpp"
#include "dagnn/mpnn.hpp"

namespace dagnn {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "dagnn-checkpoint-v1";

json config_to_json(const DagnnConfig& c) {
  return json{{"num_layers", c.num_layers},
              {"hidden_dim", c.hidden_dim},
              {"input_dim", c.input_dim},
              {"num_edge_types", c.num_edge_types},
              {"bidirectional", c.bidirectional},
              {"aggregator", to_string(c.aggregator)},
              {"combiner", to_string(c.combiner)},
              {"readout", to_string(c.readout_scope)},
              {"output", to_string(c.output)},
              {"output_dim", c.output_dim}};
}

DagnnConfig dagnn_config_from_json(const json& j) {
  DagnnConfig c;
  c.num_layers = j.at("num_layers").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.input_dim = j.at("input_dim").get<int>();
  c.num_edge_types = j.at("num_edge_types").get<int>();
  c.bidirectional = j.at("bidirectional").get<bool>();
  c.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
  c.combiner = parse_combiner(j.at("combiner").get<std::string>());
  c.readout_scope = parse_readout_scope(j.at("readout").get<std::string>());
  c.output = parse_output_kind(j.at("output").get<std::string>());
  c.output_dim = j.at("output_dim").get<int>();
  return c;
}

json config_to_json(const MpnnConfig& c) {
  return json{{"num_layers", c.num_layers},
              {"hidden_dim", c.hidden_dim},
              {"input_dim", c.input_dim},
              {"output", to_string(c.output)},
              {"output_dim", c.output_dim}};
}

MpnnConfig mpnn_config_from_json(const json& j) {
  MpnnConfig c;
  c.num_layers = j.at("num_layers").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.input_dim = j.at("input_dim").get<int>();
  c.output = parse_output_kind(j.at("output").get<std::string>());
  c.output_dim = j.at("output_dim").get<int>();
  return c;
}

void fill_params(ParamSet& params, const json& stored) {
  if (stored.size() != params.count())
    throw Error("checkpoint: expected " + std::to_string(params.count()) +
                " parameters, file has " + std::to_string(stored.size()));
  for (std::size_t i = 0; i < params.count(); ++i) {
    const int id = static_cast<int>(i);
    const std::string& name = params.name(id);
    const auto it = stored.find(name);
    if (it == stored.end()) throw Error("checkpoint: missing parameter " + name);
    const auto shape = it->at("shape").get<std::vector<std::size_t>>();
    const auto data = it->at("data").get<std::vector<double>>();
    DenseArray& target = params.array(id);
    if (shape.size() != 2 || shape[0] != target.rows() || shape[1] != target.cols() ||
        data.size() != target.size())
      throw Error("checkpoint: shape mismatch for " + name);
    for (std::size_t k = 0; k < data.size(); ++k) target[k] = data[k];
  }
}

}  // namespace

void save_checkpoint(const GraphModel& model, const std::filesystem::path& path) {
  json j;
  j["format"] = kFormat;
  j["model"] = model.kind();
  if (const auto* dagnn = dynamic_cast<const DagnnModel*>(&model)) {
    j["config"] = config_to_json(dagnn->config());
  } else if (const auto* mpnn = dynamic_cast<const MpnnModel*>(&model)) {
    j["config"] = config_to_json(mpnn->config());
  } else {
    throw Error("save_checkpoint: unknown model kind " + model.kind());
  }

  json params = json::object();
  const ParamSet& set = model.params();
  for (std::size_t i = 0; i < set.count(); ++i) {
    const int id = static_cast<int>(i);
    const DenseArray& a = set.array(id);
    params[set.name(id)] = json{{"shape", {a.rows(), a.cols()}},
                                {"data", std::vector<double>(a.raw())}};
  }
  j["params"] = std::move(params);

  std::ofstream file(path);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << j.dump() << '\n';
  if (!file) throw IoError("failed writing " + path.string());
}

std::unique_ptr<GraphModel> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open " + path.string());
  json j;
  try {
    file >> j;
  } catch (const std::exception& e) {
    throw Error("checkpoint: invalid JSON in " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != kFormat)
    throw Error("checkpoint: unsupported format in " + path.string());

  const std::string kind = j.at("model").get<std::string>();
  std::unique_ptr<GraphModel> model;
  if (kind == "dagnn") {
    model = std::make_unique<DagnnModel>(dagnn_config_from_json(j.at("config")), 0);
  } else if (kind == "mpnn") {
    model = std::make_unique<MpnnModel>(mpnn_config_from_json(j.at("config")), 0);
  } else {
    throw Error("checkpoint: unknown model kind " + kind);
  }
  fill_params(model->params(), j.at("params"));
  return model;
}

}  // namespace dagnn
