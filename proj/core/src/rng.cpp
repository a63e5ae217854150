// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/rng.hpp"

#include <cmath>
#include <numbers>

#include "seadapt/common.hpp"

namespace seadapt {

std::uint64_t fnv1a(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (const char c : data) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::uint64_t mix_u64(std::uint64_t h, std::uint64_t v) {
  // Feed each byte of v through the same FNV-1a step.
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffull;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
  return mix_u64(fnv1a(stream), base);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index) {
  return mix_u64(derive_seed(base, stream), index);
}

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next_u64() {
  // splitmix64 (Steele, Lea, Flood 2014). One 64-bit word of state.
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  // 53 random bits into [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  require(lo <= hi, "uniform(lo, hi): lo ", lo, " exceeds hi ", hi);
  return lo + (hi - lo) * uniform();
}

int Rng::uniform_int(int n) {
  require(n > 0, "uniform_int: bound must be positive, got ", n);
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return static_cast<int>(v % bound);
}

bool Rng::bernoulli(double p) {
  require(p >= 0.0 && p <= 1.0, "bernoulli: p must lie in [0,1], got ", p);
  return uniform() < p;
}

double Rng::normal() {
  // Box-Muller, cosine branch only. u1 is mapped to (0, 1] so the log is
  // finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

}  // namespace seadapt
