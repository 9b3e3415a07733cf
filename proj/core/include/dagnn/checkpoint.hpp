#pragma once

#include <filesystem>
#include <memory>

#include "dagnn/model.hpp"

namespace dagnn {

// JSON checkpoint with the model kind, its configuration, and one entry per
// named parameter:
//   {"format": "dagnn-checkpoint-v1", "model": "dagnn"|"mpnn",
//    "config": {...}, "params": {"input.W": {"shape": [r, c], "data": [...]}, ...}}
// Names and shapes are fixed by the model configuration, so checkpoints are
// portable across implementations that follow the same naming.
void save_checkpoint(const GraphModel& model, const std::filesystem::path& path);
std::unique_ptr<GraphModel> load_checkpoint(const std::filesystem::path& path);

}  // namespace dagnn
