// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seadapt/manifest.hpp"
#include "seadapt/tensor_io.hpp"

namespace seadapt {

// Procedural two-domain shape-classification benchmark. The source domain
// renders clean grayscale shapes under five mildly corrupting capture
// conditions with balanced classes; the target domain re-renders the same
// shape vocabulary with harsher corruption parameters, a global style
// shift, and a long-tailed class distribution, so a model trained on the
// source alone transfers poorly.
struct ToyBenchmarkConfig {
  int n_source = 1000;
  int n_target = 1000;
  int image_size = 32;  // square, single channel
  std::uint64_t seed = 7;

  // Corruption severity ranges per domain. Severity scales every weather
  // recipe (noise, fog, darkening, streak count).
  double source_severity_lo = 0.15;
  double source_severity_hi = 0.45;
  double target_severity_lo = 0.50;
  double target_severity_hi = 1.00;

  // Fraction of source samples rendered at near-maximal severity
  // (0.85..1.0) regardless of the range above. Models the unusable
  // captures that slip into a scraped pool; their low quality score is
  // what the difficulty prior is supposed to flag.
  double source_noise_fraction = 0.0;

  // Weather condition proportions in enum order (sunny, cloudy, foggy,
  // rainstorm, sunset_night). Empty keeps the built-in mixes: uniform on
  // the source, harsh-skewed on the target.
  std::vector<double> source_weather_mix;
  std::vector<double> target_weather_mix;

  // Fraction of source samples whose outline is morphed partway toward a
  // fixed neighbor class (label keeps the dominant shape). Such captures
  // sit near the class boundary and never become easy, so they keep the
  // classification loss informative late into training.
  double source_ambiguous_fraction = 0.0;
  double ambiguity_lo = 0.20;
  double ambiguity_hi = 0.45;

  // Target-only global appearance shift: gamma curve plus an affine
  // intensity remap applied after the weather corruption.
  double style_gamma = 1.30;
  double style_scale = 0.92;
  double style_offset = 0.03;

  void validate() const;
};

// circle, square, triangle, cross, ring.
const std::vector<std::string>& toy_label_space();

// Head-heavy class proportions of the target domain, in label order.
const std::vector<double>& toy_target_class_profile();

// One rendered domain held in memory: records plus a pixel blob; record
// image refs point into `blob_file` by index.
struct ToyDomain {
  std::vector<SampleRecord> records;
  TensorBlob images;
  std::string blob_file;
};

ToyDomain render_toy_domain(Domain domain, const ToyBenchmarkConfig& cfg);

struct ToyBenchmarkPaths {
  std::filesystem::path source_manifest;
  std::filesystem::path target_manifest;
};

// Renders both domains and writes manifests plus pixel blobs under `dir`.
// Target records keep their class labels in the file; loading the
// manifest quarantines them behind the evaluation accessor.
ToyBenchmarkPaths generate_toy_benchmark(const std::filesystem::path& dir,
                                         const ToyBenchmarkConfig& cfg);

}  // namespace seadapt
