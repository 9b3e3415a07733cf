#include "dagnn/tape.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "dagnn/errors.hpp"
#include "dagnn/rng.hpp"

namespace dagnn {
namespace {

DenseArray random_vector(Rng& rng, std::size_t len, double lo = -2.0, double hi = 2.0) {
  DenseArray v = DenseArray::vector(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

DenseArray random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  DenseArray m = DenseArray::zeros(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-2.0, 2.0);
  return m;
}

TEST(TapeForward, AddSubMulElementwise) {
  Tape tape;
  const Value a = tape.input(DenseArray::from({1.0, 2.0}));
  const Value b = tape.input(DenseArray::from({10.0, -1.0}));
  EXPECT_EQ(add(a, b).val(), DenseArray::from({11.0, 1.0}));
  EXPECT_EQ(sub(a, b).val(), DenseArray::from({-9.0, 3.0}));
  EXPECT_EQ(mul(a, b).val(), DenseArray::from({10.0, -2.0}));
}

TEST(TapeForward, MatvecAgainstHandComputation) {
  Tape tape;
  const Value m = tape.input(DenseArray::from_rows(2, 3, {1, 2, 3, 4, 5, 6}));
  const Value x = tape.input(DenseArray::from({1.0, 0.0, -1.0}));
  EXPECT_EQ(matvec(m, x).val(), DenseArray::from({-2.0, -2.0}));
}

TEST(TapeForward, MatmulAgainstHandComputation) {
  Tape tape;
  const Value a = tape.input(DenseArray::from_rows(2, 2, {1, 2, 3, 4}));
  const Value b = tape.input(DenseArray::from_rows(2, 2, {0, 1, 1, 0}));
  EXPECT_EQ(matmul(a, b).val(), DenseArray::from_rows(2, 2, {2, 1, 4, 3}));
}

TEST(TapeForward, SoftmaxUniformOnEqualLogits) {
  Tape tape;
  const Value s = softmax(tape.input(DenseArray::from({0.0, 0.0, 0.0})));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(s.val()[i], 1.0 / 3.0);
}

TEST(TapeForward, SoftmaxSumsToOneAndShiftInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = static_cast<std::size_t>(rng.uniform_int(1, 8));
    DenseArray logits = random_vector(rng, len, -30.0, 30.0);
    DenseArray shifted_logits = logits;
    const double shift = rng.uniform(-100.0, 100.0);
    for (std::size_t i = 0; i < len; ++i) shifted_logits[i] += shift;

    Tape tape;
    const Value p = softmax(tape.input(logits));
    const Value q = softmax(tape.input(shifted_logits));
    double total = 0.0;
    for (std::size_t i = 0; i < len; ++i) total += p.val()[i];
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (std::size_t i = 0; i < len; ++i) EXPECT_NEAR(p.val()[i], q.val()[i], 1e-12);
  }
}

TEST(TapeForward, MaxPoolCoordinatewise) {
  Tape tape;
  const std::vector<Value> vs{tape.input(DenseArray::from({1.0, 5.0})),
                              tape.input(DenseArray::from({3.0, 2.0}))};
  EXPECT_EQ(max_pool(vs).val(), DenseArray::from({3.0, 5.0}));
}

TEST(TapeBackward, SigmoidDerivativeAtZero) {
  Tape tape;
  const Value x = tape.input(DenseArray::scalar(0.0));
  const Value y = sigmoid(x);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 0.25);
}

TEST(TapeBackward, DotQuadraticGradient) {
  Tape tape;
  const Value x = tape.input(DenseArray::from({1.0, 2.0}));
  const Value y = dot(x, x);
  tape.backward(y);
  EXPECT_EQ(x.grad(), DenseArray::from({2.0, 4.0}));
}

TEST(TapeBackward, MaxPoolTieGoesToEarliestInput) {
  Tape tape;
  const Value a = tape.input(DenseArray::from({1.0, 7.0}));
  const Value b = tape.input(DenseArray::from({1.0, 3.0}));
  const Value pooled = max_pool(std::vector<Value>{a, b});
  tape.backward(sum(pooled));
  EXPECT_EQ(a.grad(), DenseArray::from({1.0, 1.0}));
  EXPECT_EQ(b.grad(), DenseArray::from({0.0, 0.0}));
}

TEST(TapeBackward, SharedSubexpressionAccumulates) {
  // f(x) = x.x + sum(x); the leaf is reached by two paths
  const TapeProgram f = [](Tape&, const std::vector<Value>& p) {
    return add(dot(p[0], p[0]), sum(p[0]));
  };
  Rng rng(5);
  EXPECT_LT(grad_check(f, {random_vector(rng, 4)}, 1e-5), 1e-8);

  Tape tape;
  const Value x = tape.input(DenseArray::from({3.0}));
  const Value y = add(mul(x, x), x);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);  // 2x + 1
}

TEST(TapeBackward, ConstantHasExactlyZeroGradient) {
  const TapeProgram f = [](Tape& tape, const std::vector<Value>&) {
    return tape.input(DenseArray::scalar(42.0));
  };
  Rng rng(7);
  EXPECT_EQ(grad_check(f, {random_vector(rng, 3)}, 1e-5), 0.0);
}

TEST(GradCheck, QuadraticWithinTolerance) {
  const TapeProgram f = [](Tape&, const std::vector<Value>& p) {
    return dot(p[0], p[0]);
  };
  EXPECT_LT(grad_check(f, {DenseArray::from({1.0, 2.0})}, 1e-5), 1e-7);
}

// one composite program per primitive, each reduced to a scalar
TEST(GradCheck, EveryPrimitive) {
  Rng rng(11);
  const double step = 1e-5;
  const double tol = 1e-6;

  const std::vector<std::pair<const char*, std::pair<TapeProgram, std::vector<DenseArray>>>>
      cases{
          {"add", {[](Tape&, const std::vector<Value>& p) { return sum(add(p[0], p[1])); },
                   {random_vector(rng, 5), random_vector(rng, 5)}}},
          {"sub", {[](Tape&, const std::vector<Value>& p) { return sum(sub(p[0], p[1])); },
                   {random_vector(rng, 5), random_vector(rng, 5)}}},
          {"mul", {[](Tape&, const std::vector<Value>& p) { return sum(mul(p[0], p[1])); },
                   {random_vector(rng, 5), random_vector(rng, 5)}}},
          {"scale", {[](Tape&, const std::vector<Value>& p) { return sum(scale(p[0], p[1])); },
                     {DenseArray::scalar(1.3), random_vector(rng, 5)}}},
          {"scale_const",
           {[](Tape&, const std::vector<Value>& p) { return sum(scale_const(p[0], -2.5)); },
            {random_vector(rng, 5)}}},
          {"one_minus",
           {[](Tape&, const std::vector<Value>& p) { return sum(one_minus(p[0])); },
            {random_vector(rng, 5)}}},
          {"matmul",
           {[](Tape&, const std::vector<Value>& p) { return sum(matmul(p[0], p[1])); },
            {random_matrix(rng, 3, 4), random_matrix(rng, 4, 2)}}},
          {"matvec",
           {[](Tape&, const std::vector<Value>& p) { return sum(matvec(p[0], p[1])); },
            {random_matrix(rng, 3, 4), random_vector(rng, 4)}}},
          {"concat_slice",
           {[](Tape&, const std::vector<Value>& p) {
              const Value joined = concat(std::vector<Value>{p[0], p[1]});
              return dot(slice(joined, 1, 4), slice(joined, 2, 4));
            },
            {random_vector(rng, 4), random_vector(rng, 4)}}},
          {"sum", {[](Tape&, const std::vector<Value>& p) { return sum(mul(p[0], p[0])); },
                   {random_vector(rng, 5)}}},
          {"dot", {[](Tape&, const std::vector<Value>& p) { return dot(p[0], p[1]); },
                   {random_vector(rng, 5), random_vector(rng, 5)}}},
          {"sigmoid",
           {[](Tape&, const std::vector<Value>& p) { return sum(sigmoid(p[0])); },
            {random_vector(rng, 5)}}},
          {"tanh", {[](Tape&, const std::vector<Value>& p) { return sum(tanh(p[0])); },
                    {random_vector(rng, 5)}}},
          {"softmax",
           {[](Tape&, const std::vector<Value>& p) {
              return dot(softmax(p[0]), p[1]);
            },
            {random_vector(rng, 5), random_vector(rng, 5)}}},
          {"log_sum_exp",
           {[](Tape&, const std::vector<Value>& p) { return log_sum_exp(p[0]); },
            {random_vector(rng, 5)}}},
          {"max_pool",
           {[](Tape&, const std::vector<Value>& p) {
              return sum(max_pool(std::vector<Value>{p[0], p[1], p[2]}));
            },
            {random_vector(rng, 5), random_vector(rng, 5), random_vector(rng, 5)}}},
      };

  for (const auto& [name, c] : cases)
    EXPECT_LT(grad_check(c.first, c.second, step), tol) << name;
}

TEST(GradCheck, LogSumExpValue) {
  Tape tape;
  const Value x = tape.input(DenseArray::from({1.0, 2.0, 3.0}));
  const double expected =
      std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  EXPECT_NEAR(log_sum_exp(x).val()[0], expected, 1e-12);
}

TEST(TapeErrors, ShapeMismatchThrows) {
  Tape tape;
  const Value a = tape.input(DenseArray::from({1.0, 2.0}));
  const Value b = tape.input(DenseArray::from({1.0, 2.0, 3.0}));
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(mul(a, b), ShapeError);
  EXPECT_THROW(dot(a, b), ShapeError);
  EXPECT_THROW(matvec(a, b), ShapeError);
  EXPECT_THROW(slice(a, 1, 5), ShapeError);
}

TEST(TapeErrors, BackwardRequiresScalar) {
  Tape tape;
  const Value a = tape.input(DenseArray::from({1.0, 2.0}));
  EXPECT_THROW(tape.backward(a), ShapeError);
}

TEST(TapeErrors, NonFiniteEvaluationDetected) {
  const TapeProgram f = [](Tape& tape, const std::vector<Value>& p) {
    return scale(tape.input(DenseArray::scalar(1e308)),
                 scale(tape.input(DenseArray::scalar(1e308)), p[0]));
  };
  EXPECT_THROW(grad_check(f, {DenseArray::scalar(2.0)}, 1e-5), NonFiniteError);
}

}  // namespace
}  // namespace dagnn
