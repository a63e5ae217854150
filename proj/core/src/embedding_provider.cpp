// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/embedding_provider.hpp"

#include <cctype>
#include <cmath>
#include <string_view>

#include "seadapt/common.hpp"
#include "seadapt/rng.hpp"

namespace seadapt {

namespace {

Eigen::VectorXd unit_gaussian(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  const double n = v.norm();
  require(n > 0.0, "embedding: degenerate zero draw");
  return v / n;
}

std::uint64_t hash_pixels(const Eigen::RowVectorXd& pixels) {
  const auto* bytes = reinterpret_cast<const char*>(pixels.data());
  return fnv1a(std::string_view(
      bytes, static_cast<std::size_t>(pixels.size()) * sizeof(double)));
}

}  // namespace

EmbeddingVector image_embedding(EmbeddingProvider& provider,
                                const Eigen::RowVectorXd& pixels,
                                const ImageDims& dims) {
  EmbeddingVector v = provider.embed_image(pixels, dims);
  require(v.dim() == provider.embed_dim(), "image embedding: provider '",
          provider.identity(), "' returned dimension ", v.dim(),
          ", expected ", provider.embed_dim());
  require(!v.normalized || std::abs(v.values.norm() - 1.0) < 1e-5,
          "image embedding: vector marked normalized but has norm ",
          v.values.norm());
  return v;
}

HashEmbeddingProvider::HashEmbeddingProvider(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  require(dim > 0, "hash provider: dimension must be positive");
}

EmbeddingVector HashEmbeddingProvider::from_hash(std::uint64_t h) const {
  Rng rng(derive_seed(seed_, "hash-provider", h));
  return {unit_gaussian(rng, dim_), true};
}

EmbeddingVector HashEmbeddingProvider::embed_text(const std::string& prompt) {
  return from_hash(fnv1a(prompt));
}

EmbeddingVector HashEmbeddingProvider::embed_image(
    const Eigen::RowVectorXd& pixels, const ImageDims& dims) {
  require(pixels.size() == dims.pixels(), "hash provider: pixel row size ",
          pixels.size(), " does not match dims ", dims.height, "x", dims.width,
          "x", dims.channels);
  return from_hash(hash_pixels(pixels));
}

std::string HashEmbeddingProvider::identity() const {
  return concat("hash-stub:v1:d=", dim_, ":seed=", seed_);
}

ToyFrozenEncoder::ToyFrozenEncoder(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  require(dim > 0, "toy-frozen provider: dimension must be positive");
}

EmbeddingVector ToyFrozenEncoder::embed_text(const std::string& prompt) {
  // Bag of word anchors: each distinct lowercase word owns a fixed random
  // unit vector; the prompt embeds as the normalized sum.
  require(!prompt.empty(), "toy-frozen provider: empty prompt");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
  std::string word;
  int words = 0;
  const auto flush = [&] {
    if (word.empty()) return;
    Rng rng(derive_seed(seed_, "toy-frozen.word", fnv1a(word)));
    sum += unit_gaussian(rng, dim_);
    ++words;
    word.clear();
  };
  for (const char c : prompt) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      word.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    else
      flush();
  }
  flush();
  require(words > 0, "toy-frozen provider: prompt '", prompt,
          "' has no words");
  const double n = sum.norm();
  require(n > 1e-12, "toy-frozen provider: degenerate prompt embedding");
  return {sum / n, true};
}

const Eigen::MatrixXd& ToyFrozenEncoder::projection_for(const ImageDims& dims) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_tuple(dims.height, dims.width, dims.channels);
  auto it = projections_.find(key);
  if (it == projections_.end()) {
    Rng rng(derive_seed(seed_, "toy-frozen.projection",
                        fnv1a(concat(dims.height, "x", dims.width, "x",
                                     dims.channels))));
    Eigen::MatrixXd p(dim_, dims.pixels());
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims.pixels()));
    for (int r = 0; r < p.rows(); ++r)
      for (int c = 0; c < p.cols(); ++c) p(r, c) = scale * rng.normal();
    it = projections_.emplace(key, std::move(p)).first;
  }
  return it->second;
}

EmbeddingVector ToyFrozenEncoder::embed_image(const Eigen::RowVectorXd& pixels,
                                              const ImageDims& dims) {
  require(pixels.size() == dims.pixels(),
          "toy-frozen provider: pixel row size ", pixels.size(),
          " does not match dims ", dims.height, "x", dims.width, "x",
          dims.channels);
  Eigen::VectorXd v = projection_for(dims) * pixels.transpose();
  // Soft saturation keeps outliers from dominating the direction.
  v = v.array().tanh();
  const double n = v.norm();
  require(n > 1e-12, "toy-frozen provider: degenerate image embedding");
  return {v / n, true};
}

std::string ToyFrozenEncoder::identity() const {
  return concat("toy-frozen:v1:d=", dim_, ":seed=", seed_);
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& name,
                                                 int dim, std::uint64_t seed) {
  if (name == "hash") return std::make_unique<HashEmbeddingProvider>(dim, seed);
  if (name == "toy-frozen") return std::make_unique<ToyFrozenEncoder>(dim, seed);
  fail_config("unknown embedding provider '", name,
              "' (expected hash or toy-frozen)");
}

}  // namespace seadapt
