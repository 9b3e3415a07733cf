#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "dagnn/dense_array.hpp"

namespace dagnn {

class Tape;

// Handle to one node of a tape. Plain value type; valid while its tape lives.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  const DenseArray& val() const;
  const DenseArray& grad() const;
  std::size_t size() const { return val().size(); }
};

// Computation tape for reverse-mode differentiation. Nodes are appended in
// evaluation order, which is a topological order of the expression graph, so
// a single reverse sweep accumulates exact gradients. One tape serves one
// forward/backward pass on one thread; build a fresh tape per sample.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf holding a copy of v. Its gradient is available after backward().
  Value input(DenseArray v);

  // Extension point used by all primitives: value plus the backward step
  // that routes this node's gradient into its parents.
  Value make_node(DenseArray v, std::function<void(Tape&)> back);

  // Reverse sweep from a scalar output: zeroes gradients of nodes up to the
  // output, seeds it with 1, then walks the tape backwards. Throws
  // NonFiniteError if the output value is not finite.
  void backward(Value output);

  std::size_t size() const { return nodes_.size(); }
  const DenseArray& val(int id) const { return nodes_[id].val; }
  const DenseArray& grad(int id) const { return nodes_[id].grad; }
  DenseArray& grad_mut(int id) { return nodes_[id].grad; }

 private:
  struct Node {
    DenseArray val;
    DenseArray grad;
    std::function<void(Tape&)> back;  // empty for leaves
  };
  // deque: references returned by val()/grad() stay valid as nodes are added
  std::deque<Node> nodes_;
};

inline const DenseArray& Value::val() const { return tape->val(id); }
inline const DenseArray& Value::grad() const { return tape->grad(id); }

// ---- primitives ------------------------------------------------------
// All enforce shape compatibility and throw ShapeError on mismatch.

Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);  // elementwise
Value scale(Value s, Value a);  // scalar s times every entry of a
Value scale_const(Value a, double c);
Value one_minus(Value a);  // 1 - a, elementwise
Value matmul(Value a, Value b);
Value matvec(Value m, Value x);
Value concat(std::span<const Value> parts);  // vectors -> one vector
Value slice(Value x, std::size_t offset, std::size_t len);  // flat slice -> vector
Value sum(Value x);  // -> scalar
Value dot(Value x, Value y);  // -> scalar
Value sigmoid(Value x);
Value tanh(Value x);
Value softmax(Value x);  // vector, computed with max subtraction
Value log_sum_exp(Value x);  // vector -> scalar, max subtraction
// Elementwise max of same-length vectors; on ties the gradient goes to the
// earliest input.
Value max_pool(std::span<const Value> vectors);

// ---- gradient verification -------------------------------------------

// A scalar computation built on a fresh tape from parameter leaves bound in
// the order of `params`.
using TapeProgram = std::function<Value(Tape&, const std::vector<Value>&)>;

// Max over all parameter coordinates of the relative error between the
// reverse-mode gradient and the central finite difference with the given
// step; relative error is |a - b| / max(1e-8, |a| + |b|). Throws
// NonFiniteError if any evaluation is not finite.
double grad_check(const TapeProgram& f, const std::vector<DenseArray>& params,
                  double step);

}  // namespace dagnn
