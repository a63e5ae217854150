// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/perturbation.hpp"

#include <algorithm>
#include <numeric>

#include "seadapt/common.hpp"

namespace seadapt {

void PerturbationConfig::validate(int backbone_blocks) const {
  require(gamma >= 0.0 && gamma <= 1.0,
          "perturbation: gamma must lie in [0,1], got ", gamma);
  if (!enabled) return;
  require(!alternate_blocks.empty(),
          "perturbation: alternate block set is empty");
  for (const int l : alternate_blocks)
    require(l >= 0 && l < backbone_blocks, "perturbation: block ", l,
            " outside [0,", backbone_blocks, ")");
}

int select_block(const PerturbationConfig& cfg, Rng& rng) {
  require(!cfg.alternate_blocks.empty(),
          "perturbation: alternate block set is empty");
  return cfg.alternate_blocks[static_cast<std::size_t>(
      rng.uniform_int(static_cast<int>(cfg.alternate_blocks.size())))];
}

std::vector<int> pair_within_batch(int batch, Rng& rng) {
  require(batch >= 2, "perturbation: pairing needs a batch of at least 2, got ",
          batch);
  std::vector<int> perm(static_cast<std::size_t>(batch));
  std::iota(perm.begin(), perm.end(), 0);
  // Rejection sampling over shuffles: for batch >= 2 a shuffle is a
  // derangement with probability about 1/e, so this terminates fast and
  // stays a pure function of the rng stream.
  for (;;) {
    rng.shuffle(perm);
    bool fixed_point = false;
    for (int i = 0; i < batch; ++i)
      if (perm[static_cast<std::size_t>(i)] == i) {
        fixed_point = true;
        break;
      }
    if (!fixed_point) return perm;
  }
}

TokenSequence token_offset(const TokenSequence& s_i, const TokenSequence& s_j,
                           double gamma_mu) {
  s_i.validate();
  s_j.validate();
  require(s_i.data.rows() == s_j.data.rows() &&
              s_i.data.cols() == s_j.data.cols(),
          "token offset: shape mismatch ", s_i.data.rows(), "x",
          s_i.data.cols(), " vs ", s_j.data.rows(), "x", s_j.data.cols());
  TokenSequence out = s_i;
  out.data = s_i.data + gamma_mu * (s_j.data - s_i.data);
  return out;
}

ad::Mat permute_samples(const ad::Mat& rows, const std::vector<int>& pairing,
                        int tokens_per_sample) {
  const int batch = static_cast<int>(pairing.size());
  require(tokens_per_sample > 0, "permute_samples: bad token count");
  require(rows.rows() == static_cast<long>(batch) * tokens_per_sample,
          "permute_samples: ", rows.rows(), " rows do not match batch ",
          batch, " * ", tokens_per_sample, " tokens");
  ad::Mat out(rows.rows(), rows.cols());
  for (int i = 0; i < batch; ++i) {
    const int j = pairing[static_cast<std::size_t>(i)];
    require(j >= 0 && j < batch, "permute_samples: pairing index ", j,
            " outside [0,", batch, ")");
    out.middleRows(static_cast<long>(i) * tokens_per_sample,
                   tokens_per_sample) =
        rows.middleRows(static_cast<long>(j) * tokens_per_sample,
                        tokens_per_sample);
  }
  return out;
}

ad::Var token_offset(ad::Graph& g, ad::Var tokens,
                     const std::vector<int>& pairing, int tokens_per_sample,
                     double gamma_mu) {
  const ad::Mat& tv = g.value(tokens);
  for (std::size_t i = 0; i < pairing.size(); ++i)
    require(pairing[i] != static_cast<int>(i),
            "token offset: pairing has a fixed point at ", i);
  const ad::Mat others = permute_samples(tv, pairing, tokens_per_sample);
  // The offset enters as data: d(out)/d(tokens) is exactly the identity
  // and the paired samples receive no gradient through this path.
  return g.add_detached(tokens, gamma_mu * (others - tv));
}

}  // namespace seadapt
