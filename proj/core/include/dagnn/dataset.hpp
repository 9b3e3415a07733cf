#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagnn/dag.hpp"
#include "dagnn/rng.hpp"

namespace dagnn {

enum class FeatureMode { onehot_indegree, random, onehot_topoindex };

std::string to_string(FeatureMode m);
FeatureMode parse_feature_mode(std::string_view s);

// Random-DAG generator settings. Feature vectors always have dimension
// n_max, which is also the class count of the longest-path task.
struct GenParams {
  int n_min = 4;
  int n_max = 15;
  double edge_prob = 0.35;
  int num_edge_types = 2;
  FeatureMode feature_mode = FeatureMode::onehot_indegree;

  void validate() const;
};

struct Sample {
  Dag dag;
  double label = 0.0;
};

enum class Task { lp, score };

std::string to_string(Task t);
Task parse_task(std::string_view s);

// Erdos-Renyi style DAG on the node order: each pair i < j gets edge (i, j)
// with probability edge_prob and a uniform edge type. Acyclic by
// construction.
Dag gen_random_dag(const GenParams& params, Rng& rng);

// Longest-path classification: label = edge count of the longest directed
// path = longest_path_node_count - 1, classes 0 .. n_max - 1.
std::vector<Sample> gen_lp_dataset(int count, const GenParams& params,
                                   std::uint64_t seed);

// Structure-score regression: the pre-noise score of a graph is
//   1.0 * longest_path_node_count + 0.5 * mean in-degree
//   + 0.25 * sum over edges of (edge_type + 1),
// an isomorphism invariant. Labels add Gaussian noise (sigma 0.05) and are
// standardized to zero mean / unit variance over the generated set.
double structure_score(const Dag& dag);
std::vector<Sample> gen_score_dataset(int count, const GenParams& params,
                                      std::uint64_t seed);

// JSON-lines, one graph per line:
//   {"n": int, "edges": [[tail, head, type], ...], "x": [[...], ...], "y": number}
void save_jsonl(std::span<const Sample> samples, const std::filesystem::path& path);
std::vector<Sample> load_jsonl(const std::filesystem::path& path);

// Class-label counts for a longest-path dataset.
std::map<int, std::size_t> label_histogram(std::span<const Sample> samples);

}  // namespace dagnn
