// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "seadapt/manifest.hpp"
#include "seadapt/rng.hpp"

namespace seadapt {

// One training batch: a source half and a target half.
struct MixedBatch {
  std::vector<SampleRecord> source_items;
  std::vector<SampleRecord> target_items;

  int size() const {
    return static_cast<int>(source_items.size() + target_items.size());
  }
};

// Draws mixed batches with an even split: ceil(B/2) source items from the
// active subset, floor(B/2) target items. Each domain is shuffled and
// cycled independently; a pass wrapping past the end reshuffles. Batches
// are a pure function of (manifest, active set, B, seed, draw index).
class MixedBatchSampler {
 public:
  // active_source_ids must be a nonempty subset of the manifest's source
  // ids; B must be at least 2. A manifest without target records yields
  // all-source batches.
  MixedBatchSampler(const DomainManifest& manifest,
                    const std::set<std::string>& active_source_ids,
                    int batch_size, std::uint64_t seed);

  MixedBatch next();

  int source_slots() const { return source_slots_; }
  int target_slots() const { return target_slots_; }

  // Batches needed for one pass over the active source subset.
  int batches_per_epoch() const;

 private:
  struct Cycle {
    std::vector<const SampleRecord*> items;
    std::size_t pos = 0;
  };

  const SampleRecord* draw(Cycle& cycle, Rng& rng);

  const DomainManifest* manifest_;
  int source_slots_;
  int target_slots_;
  Cycle source_;
  Cycle target_;
  Rng source_rng_;
  Rng target_rng_;
};

// Convenience wrapper: first batch of a fresh sampler.
MixedBatch sample_mixed_batch(const DomainManifest& manifest,
                              const std::set<std::string>& active_source_ids,
                              int batch_size, std::uint64_t seed);

}  // namespace seadapt
