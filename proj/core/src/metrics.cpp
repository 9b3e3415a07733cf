#include "dagnn/metrics.hpp"

#include <cmath>

#include "dagnn/errors.hpp"
#include "dagnn/params.hpp"

namespace dagnn {

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty())
    throw DegenerateError("pearson_r: need two equal-length nonempty series");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  const double denom = std::sqrt(vx) * std::sqrt(vy);
  if (denom == 0.0)
    throw DegenerateError("pearson_r: undefined for a constant series");
  return cov / denom;
}

int argmax_class(std::span<const double> logits) {
  int best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  return best;
}

Metrics evaluate(const GraphModel& model, std::span<const Sample> samples, Task task) {
  if ((task == Task::lp) != (model.output_kind() == OutputKind::classification))
    throw Error("evaluate: task does not match the model output kind");

  std::vector<double> predictions;
  predictions.reserve(samples.size());
  std::size_t correct = 0;

  // batched forward keeps evaluation on the same merge-batched path as
  // training; 64 graphs per tape bounds tape size
  constexpr std::size_t kChunk = 64;
  for (std::size_t begin = 0; begin < samples.size(); begin += kChunk) {
    const std::size_t end = std::min(samples.size(), begin + kChunk);
    std::vector<const Dag*> graphs;
    graphs.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) graphs.push_back(&samples[i].dag);

    Tape tape;
    const auto leaves = bind_params(tape, model.params());
    const auto outputs = model.forward_batch(tape, leaves, graphs);
    for (std::size_t i = begin; i < end; ++i) {
      const DenseArray& out = outputs[i - begin].val();
      if (task == Task::lp) {
        const int predicted = argmax_class(out.data());
        if (predicted == static_cast<int>(std::llround(samples[i].label))) ++correct;
      } else {
        predictions.push_back(out[0]);
      }
    }
  }

  Metrics m;
  if (task == Task::lp) {
    m.accuracy = samples.empty()
                     ? 0.0
                     : static_cast<double>(correct) / static_cast<double>(samples.size());
  } else {
    double sq = 0.0;
    std::vector<double> labels;
    labels.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      labels.push_back(samples[i].label);
      const double d = predictions[i] - samples[i].label;
      sq += d * d;
    }
    m.rmse = samples.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(samples.size()));
    try {
      m.pearson_r = pearson_r(predictions, labels);
    } catch (const DegenerateError&) {
      m.pearson_r.reset();
    }
  }
  return m;
}

}  // namespace dagnn
