// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seadapt/curriculum.hpp"
#include "seadapt/model.hpp"
#include "seadapt/perturbation.hpp"

namespace seadapt {

// Full training configuration. Loaded from a flat key=value file, then
// optionally rewritten by an ablation preset and per-key overrides; the
// resolved result is echoed into every run's invocation record.
struct TrainConfig {
  // Data and artifacts. Relative paths in a config file resolve against
  // the file's own directory.
  std::filesystem::path source_manifest;
  std::filesystem::path target_manifest;
  std::filesystem::path out_dir = "run";
  std::filesystem::path embed_cache;  // empty: no on-disk embedding cache
  std::filesystem::path resume;       // empty: fresh run

  // Frozen teacher.
  std::string provider = "toy-frozen";
  std::uint64_t provider_seed = 17;
  std::string prompt_template = "A photo of a {class} in {domain}";

  // Optimization.
  int epochs = 10;
  int batch_size = 16;
  double lr = 0.002;
  double momentum = 0.9;

  // Loss weights and the confidence threshold.
  double alpha = 0.3;
  double beta = 1.0;
  double gamma = 0.2;
  double kappa = 0.4;

  // Curriculum schedule shape.
  double lambda0 = 0.5;
  double growth_k = 2.0;
  int adaptive_period = 1000;

  // Mechanism toggles. offset_mode selects where the perturbation branch
  // injects its offset: nowhere, at the pixels, or at a hidden block.
  std::string offset_mode = "token";  // none | input | token
  std::vector<int> alternate_blocks = {0, 4, 8};
  bool skd = true;
  bool curriculum = true;

  // Bookkeeping.
  std::uint64_t seed = 0;
  int checkpoint_every = 1;  // epochs between checkpoints
  long max_steps = 0;        // 0: no cap; otherwise stop after this many

  // Architecture.
  int image_size = 224;
  int channels = 3;
  int patch_size = 16;
  int dim = 768;
  int heads = 12;
  int blocks = 12;
  int mlp_hidden = 3072;
  int embed_dim = 512;
  double dropout = 0.1;
  int disc_hidden = 256;

  // Name of the ablation preset applied last, "none" otherwise.
  std::string ablation = "none";

  bool offsets_enabled() const { return offset_mode != "none"; }

  // Derived module configurations. The class count comes from the
  // manifest, not the config file.
  ModelConfig model_config(int classes) const;
  TrainSchedule schedule() const;
  PerturbationConfig perturbation() const;

  void validate() const;
};

// Parses a key=value file ('#' comments, blank lines allowed). Unknown or
// duplicate keys and malformed values raise ConfigError naming the line.
TrainConfig load_train_config(const std::filesystem::path& file);

// Applies one key=value override; same key vocabulary as the file.
void set_config_key(TrainConfig& cfg, const std::string& key,
                    const std::string& value);

// Rewrites the toggles to one of the study presets: adversarial-only,
// input-offset, token-offset, skd, full ("none" leaves the config alone).
void apply_ablation(TrainConfig& cfg, const std::string& name);

// The resolved configuration as one compact JSON object (key order fixed),
// suitable for embedding in an invocation record.
std::string config_json(const TrainConfig& cfg);

}  // namespace seadapt
