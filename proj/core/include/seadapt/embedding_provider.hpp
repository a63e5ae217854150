// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "seadapt/tensor_io.hpp"

namespace seadapt {

struct EmbeddingVector {
  Eigen::VectorXd values;
  bool normalized = true;

  int dim() const { return static_cast<int>(values.size()); }
};

// Contract for a frozen embedding model: identical inputs yield identical
// outputs for the lifetime of the provider, no gradients flow into it, and
// outputs are unit-normalized. Implementations must be safe to call from
// multiple threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual EmbeddingVector embed_text(const std::string& prompt) = 0;
  virtual EmbeddingVector embed_image(const Eigen::RowVectorXd& pixels,
                                      const ImageDims& dims) = 0;
  virtual int embed_dim() const = 0;

  // Versioned identifier written into cache headers; changing the provider
  // or its parameters must change this string.
  virtual std::string identity() const = 0;
};

// Checks dimension and normalization of a provider output.
EmbeddingVector image_embedding(EmbeddingProvider& provider,
                                const Eigen::RowVectorXd& pixels,
                                const ImageDims& dims);

// Stub provider: returns a unit vector drawn from an rng seeded by the
// input's hash. Carries no semantics, but is frozen, fast, and has the
// right shape, so every loss and schedule test runs without model weights.
class HashEmbeddingProvider : public EmbeddingProvider {
 public:
  HashEmbeddingProvider(int dim, std::uint64_t seed = 0);

  EmbeddingVector embed_text(const std::string& prompt) override;
  EmbeddingVector embed_image(const Eigen::RowVectorXd& pixels,
                              const ImageDims& dims) override;
  int embed_dim() const override { return dim_; }
  std::string identity() const override;

 private:
  EmbeddingVector from_hash(std::uint64_t h) const;

  int dim_;
  std::uint64_t seed_;
};

// Small frozen encoder with real (if crude) semantics, standing in for a
// pretrained vision-language model in the toy benchmark:
//  - text: sum of per-word anchor vectors, so prompts sharing words (same
//    class name, same weather phrase) land near each other;
//  - image: a fixed seeded random projection of the pixels, so visually
//    similar images embed similarly.
// Both are deterministic functions of (seed, input).
class ToyFrozenEncoder : public EmbeddingProvider {
 public:
  ToyFrozenEncoder(int dim, std::uint64_t seed = 0);

  EmbeddingVector embed_text(const std::string& prompt) override;
  EmbeddingVector embed_image(const Eigen::RowVectorXd& pixels,
                              const ImageDims& dims) override;
  int embed_dim() const override { return dim_; }
  std::string identity() const override;

 private:
  const Eigen::MatrixXd& projection_for(const ImageDims& dims);

  int dim_;
  std::uint64_t seed_;
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, Eigen::MatrixXd> projections_;
};

// Forwarding wrapper that counts calls; used to verify cache hits.
class CountingProvider : public EmbeddingProvider {
 public:
  explicit CountingProvider(EmbeddingProvider& inner) : inner_(&inner) {}

  EmbeddingVector embed_text(const std::string& prompt) override {
    ++text_calls_;
    return inner_->embed_text(prompt);
  }
  EmbeddingVector embed_image(const Eigen::RowVectorXd& pixels,
                              const ImageDims& dims) override {
    ++image_calls_;
    return inner_->embed_image(pixels, dims);
  }
  int embed_dim() const override { return inner_->embed_dim(); }
  std::string identity() const override { return inner_->identity(); }

  long text_calls() const { return text_calls_; }
  long image_calls() const { return image_calls_; }

 private:
  EmbeddingProvider* inner_;
  long text_calls_ = 0;
  long image_calls_ = 0;
};

// Factory for the providers selectable from configuration ("hash" or
// "toy-frozen").
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& name,
                                                 int dim, std::uint64_t seed);

}  // namespace seadapt
