// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "seadapt/embedding_provider.hpp"
#include "seadapt/manifest.hpp"

namespace seadapt {

// Disk-backed, write-through store of embedding vectors keyed by strings.
// The file starts with a header naming the provider identity, dimension,
// and normalization flag; a cache written by a different provider (or
// dimension) is discarded on open, so stale vectors can never be served.
class EmbeddingCache {
 public:
  EmbeddingCache(std::filesystem::path file, const EmbeddingProvider& provider);
  ~EmbeddingCache();

  std::optional<Eigen::VectorXd> lookup(const std::string& key) const;
  void store(const std::string& key, const Eigen::VectorXd& values);
  void flush();

  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

  static std::string text_key(const std::string& prompt);
  static std::string image_key(const std::string& sample_id);

 private:
  std::filesystem::path file_;
  std::string header_line_;
  mutable std::mutex mutex_;
  std::map<std::string, Eigen::VectorXd> entries_;
  std::ofstream appender_;
};

// One text embedding per (class name, weather condition), all normalized.
using TextEmbeddingTable =
    std::map<std::pair<std::string, WeatherCondition>, Eigen::VectorXd>;

// Builds the full |label_space| x |weathers| prompt table through the
// provider, reading and writing `cache` when given. Prompts render the
// weather as its human-readable phrase. Provider failures are rethrown
// with the failing prompt attached.
TextEmbeddingTable text_embedding_table(
    EmbeddingProvider& provider, const std::vector<std::string>& label_space,
    const std::vector<WeatherCondition>& weathers,
    const std::string& template_text, EmbeddingCache* cache = nullptr);

}  // namespace seadapt
