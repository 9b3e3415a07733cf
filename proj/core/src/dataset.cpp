#include "dagnn/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dagnn/errors.hpp"

namespace dagnn {

using nlohmann::json;

std::string to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::onehot_indegree: return "onehot_indegree";
    case FeatureMode::random: return "random";
    case FeatureMode::onehot_topoindex: return "onehot_topoindex";
  }
  return "?";
}

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "onehot_indegree") return FeatureMode::onehot_indegree;
  if (s == "random") return FeatureMode::random;
  if (s == "onehot_topoindex") return FeatureMode::onehot_topoindex;
  throw Error("unknown feature mode: " + std::string(s));
}

std::string to_string(Task t) { return t == Task::lp ? "lp" : "score"; }

Task parse_task(std::string_view s) {
  if (s == "lp") return Task::lp;
  if (s == "score") return Task::score;
  throw Error("unknown task: " + std::string(s));
}

void GenParams::validate() const {
  if (n_min < 1 || n_max < n_min) throw Error("generator: need 1 <= n_min <= n_max");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw Error("generator: edge_prob must be in [0, 1]");
  if (num_edge_types < 1) throw Error("generator: num_edge_types must be >= 1");
}

Dag gen_random_dag(const GenParams& params, Rng& rng) {
  params.validate();
  const int n = rng.uniform_int(params.n_min, params.n_max);

  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < params.edge_prob) {
        const int type =
            params.num_edge_types == 1 ? 0 : rng.uniform_int(0, params.num_edge_types - 1);
        edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), type});
      }

  const std::size_t dim = static_cast<std::size_t>(params.n_max);
  DenseArray features = DenseArray::zeros(static_cast<std::size_t>(n), dim);
  switch (params.feature_mode) {
    case FeatureMode::onehot_indegree: {
      std::vector<std::size_t> indegree(static_cast<std::size_t>(n), 0);
      for (const Edge& e : edges) ++indegree[e.head];
      for (int v = 0; v < n; ++v)
        features(static_cast<std::size_t>(v),
                 std::min(indegree[static_cast<std::size_t>(v)], dim - 1)) = 1.0;
      break;
    }
    case FeatureMode::onehot_topoindex:
      // the generator's node order is a topological sort (edges go i -> j, i < j)
      for (int v = 0; v < n; ++v)
        features(static_cast<std::size_t>(v),
                 std::min(static_cast<std::size_t>(v), dim - 1)) = 1.0;
      break;
    case FeatureMode::random:
      for (std::size_t i = 0; i < features.size(); ++i)
        features[i] = rng.uniform(-1.0, 1.0);
      break;
  }
  return Dag::build(static_cast<std::size_t>(n), std::move(edges), std::move(features));
}

std::vector<Sample> gen_lp_dataset(int count, const GenParams& params,
                                   std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Dag dag = gen_random_dag(params, rng);
    const double label = static_cast<double>(longest_path_node_count(dag)) - 1.0;
    out.push_back({std::move(dag), label});
  }
  return out;
}

double structure_score(const Dag& dag) {
  const double path_term = static_cast<double>(longest_path_node_count(dag));
  const double mean_indegree =
      dag.num_nodes() == 0
          ? 0.0
          : static_cast<double>(dag.num_edges()) / static_cast<double>(dag.num_nodes());
  double type_term = 0.0;
  for (const Edge& e : dag.edges()) type_term += static_cast<double>(e.edge_type + 1);
  return 1.0 * path_term + 0.5 * mean_indegree + 0.25 * type_term;
}

std::vector<Sample> gen_score_dataset(int count, const GenParams& params,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Dag dag = gen_random_dag(params, rng);
    const double label = structure_score(dag) + 0.05 * rng.gaussian();
    out.push_back({std::move(dag), label});
  }

  // standardize over the generated set
  if (!out.empty()) {
    double mean = 0.0;
    for (const Sample& s : out) mean += s.label;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (const Sample& s : out) var += (s.label - mean) * (s.label - mean);
    var /= static_cast<double>(out.size());
    const double stddev = std::sqrt(var);
    if (stddev > 1e-12)
      for (Sample& s : out) s.label = (s.label - mean) / stddev;
    else
      for (Sample& s : out) s.label -= mean;
  }
  return out;
}

void save_jsonl(std::span<const Sample> samples, const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  for (const Sample& s : samples) {
    json j;
    j["n"] = s.dag.num_nodes();
    json edges = json::array();
    for (const Edge& e : s.dag.edges()) edges.push_back({e.tail, e.head, e.edge_type});
    j["edges"] = std::move(edges);
    json x = json::array();
    for (NodeId v = 0; v < s.dag.num_nodes(); ++v) {
      const auto row = s.dag.feature(v);
      x.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["x"] = std::move(x);
    j["y"] = s.label;
    file << j.dump() << '\n';
  }
  if (!file) throw IoError("failed writing " + path.string());
}

std::vector<Sample> load_jsonl(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open " + path.string());

  std::vector<Sample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::size_t n = j.at("n").get<std::size_t>();
      std::vector<Edge> edges;
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3)
          throw Error("edge entry must be [tail, head, type]");
        edges.push_back({e[0].get<NodeId>(), e[1].get<NodeId>(), e[2].get<int>()});
      }
      std::vector<std::vector<double>> features;
      for (const auto& row : j.at("x")) features.push_back(row.get<std::vector<double>>());
      const double label = j.at("y").get<double>();
      out.push_back({Dag::build(n, std::move(edges), features), label});
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::map<int, std::size_t> label_histogram(std::span<const Sample> samples) {
  std::map<int, std::size_t> hist;
  for (const Sample& s : samples) ++hist[static_cast<int>(std::llround(s.label))];
  return hist;
}

}  // namespace dagnn
