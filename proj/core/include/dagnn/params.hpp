#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dagnn/dense_array.hpp"
#include "dagnn/tape.hpp"

namespace dagnn {

// Ordered registry of named trainable arrays. The registration order is the
// canonical order used for binding leaves onto a tape, for gradient
// collection, and for optimizer state, so one index addresses the same
// parameter everywhere.
class ParamSet {
 public:
  int add(std::string name, DenseArray value) {
    const int id = static_cast<int>(arrays_.size());
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    arrays_.push_back(std::move(value));
    return id;
  }

  std::size_t count() const { return arrays_.size(); }
  const std::string& name(int i) const { return names_[i]; }
  DenseArray& array(int i) { return arrays_[i]; }
  const DenseArray& array(int i) const { return arrays_[i]; }

  int find(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    return it == index_.end() ? -1 : it->second;
  }

  std::size_t total_coords() const {
    std::size_t n = 0;
    for (const auto& a : arrays_) n += a.size();
    return n;
  }

  std::vector<DenseArray> snapshot() const { return arrays_; }
  void restore(const std::vector<DenseArray>& saved) { arrays_ = saved; }

 private:
  std::vector<std::string> names_;
  std::vector<DenseArray> arrays_;
  std::unordered_map<std::string, int> index_;
};

// Leaves for every parameter, in registry order.
inline std::vector<Value> bind_params(Tape& tape, const ParamSet& params) {
  std::vector<Value> leaves;
  leaves.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i)
    leaves.push_back(tape.input(params.array(static_cast<int>(i))));
  return leaves;
}

// Parameter gradients after backward, in registry order.
inline std::vector<DenseArray> collect_grads(const std::vector<Value>& leaves) {
  std::vector<DenseArray> grads;
  grads.reserve(leaves.size());
  for (const Value& leaf : leaves) grads.push_back(leaf.grad());
  return grads;
}

}  // namespace dagnn
