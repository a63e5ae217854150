// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "seadapt/model.hpp"

namespace seadapt {

// Training-loop position stored alongside the weights, sufficient (with
// the base seed) to rebuild every random stream and schedule value on
// resume.
struct TrainerState {
  int epoch = 0;          // completed epochs
  long iteration = 0;     // completed optimizer steps, global
  std::uint64_t seed = 0;
};

struct CheckpointHeader {
  ModelConfig config;
  TrainerState state;
};

// Writes model parameters and momentum buffers plus the trainer state.
void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const TrainerState& state);

// Reads just the header; use it to construct a Model before loading
// parameters.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Restores parameters and momentum into an existing model, which must have
// the exact architecture recorded in the file.
TrainerState load_checkpoint(const std::filesystem::path& path, Model& model);

}  // namespace seadapt
