// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace seadapt {

// FNV-1a over a byte string. Used for deriving named sub-seeds and for
// content-keyed stub embeddings; not a cryptographic hash.
std::uint64_t fnv1a(std::string_view data,
                    std::uint64_t basis = 14695981039346656037ull);

// Derives the seed of a named stream (e.g. "data", "perturb", "omega") from
// a base seed. Streams with distinct names are statistically independent;
// the same (base, name) pair always yields the same stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream);

// Same, with an index (e.g. epoch number) folded in, so per-epoch streams
// can be reconstructed from (base, name, epoch) alone when resuming.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index);

// Deterministic random source. All draw procedures are implemented here
// rather than taken from <random> distributions, whose output is not pinned
// by the standard; two builds of this library produce identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Unbiased integer on [0, n); n must be positive. Uses rejection sampling
  // to avoid modulo bias.
  int uniform_int(int n);

  bool bernoulli(double p);

  // Standard normal via Box-Muller. Draws two uniforms per call and keeps
  // no cached spare, so the stream position is a pure function of the call
  // count.
  double normal();

  double normal(double mean, double stddev);

  // Fisher-Yates shuffle driven by uniform_int.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(
          uniform_int(static_cast<int>(i)));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  // xorshift-multiply generator (splitmix64). Self-contained so that the
  // stream is identical across standard library implementations.
  std::uint64_t state_;
};

}  // namespace seadapt
