// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "seadapt/checkpoint.hpp"
#include "seadapt/config.hpp"
#include "seadapt/embedding_cache.hpp"
#include "seadapt/embedding_provider.hpp"
#include "seadapt/manifest.hpp"
#include "seadapt/sampler.hpp"

namespace seadapt {

// One optimizer step's worth of reported values. `iteration` is the global
// step count before the update, which is also where the warmup scalar mu
// is evaluated.
struct StepMetrics {
  int epoch = 0;
  int step = 0;
  long iteration = 0;
  double focal = 0.0;
  double dom = 0.0;
  double skd = 0.0;
  double offset = 0.0;
  double mu = 0.0;
  double tau = 0.0;
  double lambda = 0.0;
  int active = 0;  // size of the epoch's source training subset
  double loss_fc = 0.0;
  double loss_d = 0.0;
};

// Loads and merges the configured source and target manifests.
DomainManifest load_train_manifests(const TrainConfig& cfg);

// Orchestrates the full adaptation run: curriculum subset selection per
// epoch, mixed batches, the two-branch forward pass, one combined backward
// pass through the reversal stage, and one optimizer step over every
// trainable parameter. Writes metrics and checkpoints under out_dir.
class Trainer {
 public:
  // A null provider is built from the config. The manifest must contain
  // records of both domains.
  Trainer(TrainConfig config, DomainManifest manifest,
          std::shared_ptr<EmbeddingProvider> provider = nullptr);

  // Runs all remaining epochs (all of them, or those past the resume
  // checkpoint). Aborts with an error naming the component and batch ids
  // if any loss term turns non-finite.
  void fit();

  Model& model() { return *model_; }
  const TrainConfig& config() const { return config_; }
  const DomainManifest& manifest() const { return manifest_; }
  const std::vector<StepMetrics>& history() const { return history_; }
  TrainerState state() const;

  // Curriculum subset for epoch t under the current model; with the
  // curriculum disabled this is every source id.
  std::vector<std::string> select_active(int t);

 private:
  struct EpochStreams {
    Rng dropout;
    Rng perturb;
    Rng omega;
  };

  void run_epoch(int t, std::ostream& metrics_out, bool& stop);
  StepMetrics train_step(const MixedBatch& batch, int t, int s, int active,
                         EpochStreams& streams);
  std::vector<double> source_pool_ce();
  const Eigen::VectorXd& image_embedding_for(const SampleRecord& rec);
  Eigen::VectorXd text_embedding_for(const SampleRecord& rec) const;
  void save_epoch_checkpoint(int completed_epochs);

  TrainConfig config_;
  DomainManifest manifest_;
  ImageStore store_;
  std::shared_ptr<EmbeddingProvider> provider_;
  std::unique_ptr<EmbeddingCache> cache_;
  TextEmbeddingTable text_table_;
  std::map<std::string, Eigen::VectorXd> image_embeddings_;
  std::unique_ptr<Model> model_;
  std::unique_ptr<nn::SgdOptimizer> optimizer_;
  std::vector<const SampleRecord*> source_records_;
  int start_epoch_ = 0;
  long iteration_ = 0;
  std::vector<StepMetrics> history_;
};

}  // namespace seadapt
