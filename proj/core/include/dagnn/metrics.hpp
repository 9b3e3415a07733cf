#pragma once

#include <optional>
#include <span>

#include "dagnn/dataset.hpp"
#include "dagnn/model.hpp"

namespace dagnn {

struct Metrics {
  std::optional<double> accuracy;   // lp
  std::optional<double> rmse;       // score
  std::optional<double> pearson_r;  // score; empty when degenerate
};

// Pearson correlation with population statistics. Throws DegenerateError
// when either side has zero variance; the coefficient is undefined there,
// never reported as 0.
double pearson_r(std::span<const double> x, std::span<const double> y);

// argmax class prediction; ties resolve to the lowest index
int argmax_class(std::span<const double> logits);

// Full-dataset metrics for the task: accuracy for lp, rmse and Pearson's r
// for score. Degenerate Pearson is reported as unset.
Metrics evaluate(const GraphModel& model, std::span<const Sample> samples, Task task);

}  // namespace dagnn
