// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/sampler.hpp"

#include <algorithm>

#include "seadapt/common.hpp"

namespace seadapt {

MixedBatchSampler::MixedBatchSampler(
    const DomainManifest& manifest,
    const std::set<std::string>& active_source_ids, int batch_size,
    std::uint64_t seed)
    : manifest_(&manifest),
      source_slots_((batch_size + 1) / 2),
      target_slots_(batch_size / 2),
      source_rng_(derive_seed(seed, "sampler.source")),
      target_rng_(derive_seed(seed, "sampler.target")) {
  require(batch_size >= 2, "sampler: batch size must be at least 2, got ",
          batch_size);
  require(!active_source_ids.empty(), "sampler: active source set is empty");

  for (const auto& id : active_source_ids) {
    const SampleRecord* r = manifest.find(id);
    require(r != nullptr, "sampler: active id '", id, "' not in manifest");
    require(r->domain == Domain::source, "sampler: active id '", id,
            "' is not a source record");
    source_.items.push_back(r);
  }
  // std::set iteration is already ordered; keep the explicit sort as the
  // documented contract that batch content ignores caller-side set type.
  std::sort(source_.items.begin(), source_.items.end(),
            [](const SampleRecord* a, const SampleRecord* b) {
              return a->id < b->id;
            });

  target_.items = manifest.domain_records(Domain::target);
  std::sort(target_.items.begin(), target_.items.end(),
            [](const SampleRecord* a, const SampleRecord* b) {
              return a->id < b->id;
            });

  source_rng_.shuffle(source_.items);
  target_rng_.shuffle(target_.items);
}

const SampleRecord* MixedBatchSampler::draw(Cycle& cycle, Rng& rng) {
  if (cycle.pos == cycle.items.size()) {
    rng.shuffle(cycle.items);
    cycle.pos = 0;
  }
  return cycle.items[cycle.pos++];
}

MixedBatch MixedBatchSampler::next() {
  MixedBatch batch;
  batch.source_items.reserve(static_cast<std::size_t>(source_slots_));
  for (int i = 0; i < source_slots_; ++i)
    batch.source_items.push_back(*draw(source_, source_rng_));
  if (!target_.items.empty()) {
    batch.target_items.reserve(static_cast<std::size_t>(target_slots_));
    for (int i = 0; i < target_slots_; ++i)
      batch.target_items.push_back(*draw(target_, target_rng_));
  }
  return batch;
}

int MixedBatchSampler::batches_per_epoch() const {
  const int n = static_cast<int>(source_.items.size());
  return (n + source_slots_ - 1) / source_slots_;
}

MixedBatch sample_mixed_batch(const DomainManifest& manifest,
                              const std::set<std::string>& active_source_ids,
                              int batch_size, std::uint64_t seed) {
  MixedBatchSampler sampler(manifest, active_source_ids, batch_size, seed);
  return sampler.next();
}

}  // namespace seadapt
