// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "seadapt/model.hpp"
#include "seadapt/rng.hpp"

namespace seadapt {

// Hidden-layer token offsets: once per batch, one block out of
// alternate_blocks receives S~ = S_i + gamma_mu * (S_j - S_i), where j is a
// random other sample in the same mixed batch and the offset term carries
// no gradient.
struct PerturbationConfig {
  std::vector<int> alternate_blocks = {0, 4, 8};
  double gamma = 0.2;
  bool enabled = true;

  void validate(int backbone_blocks) const;
};

// Uniform draw over the configured blocks; one draw per batch.
int select_block(const PerturbationConfig& cfg, Rng& rng);

// Random pairing of batch indices with no fixed points (j != i for all i),
// drawn by reshuffling until a derangement appears. Requires batch >= 2.
std::vector<int> pair_within_batch(int batch, Rng& rng);

// Value-level offset on a token sequence snapshot: S_i and S_j must share
// a shape; returns S_i + gamma_mu * (S_j - S_i) with S_i's metadata.
TokenSequence token_offset(const TokenSequence& s_i, const TokenSequence& s_j,
                           double gamma_mu);

// Graph-level offset over a full batch of token rows laid out as
// (batch*tokens) x channels: every token of sample i is offset toward the
// same token of sample pairing[i]. The offset is injected as a constant,
// so gradients reach S_i untouched and never reach S_j.
ad::Var token_offset(ad::Graph& g, ad::Var tokens, const std::vector<int>& pairing,
                     int tokens_per_sample, double gamma_mu);

// The row permutation matching `pairing` on a (batch*tokens) layout; also
// used for the pixel-space offset ablation, where tokens_per_sample is 1.
ad::Mat permute_samples(const ad::Mat& rows, const std::vector<int>& pairing,
                        int tokens_per_sample);

}  // namespace seadapt
