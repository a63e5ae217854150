// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/embedding_cache.hpp"

#include <nlohmann/json.hpp>

#include "seadapt/common.hpp"
#include "seadapt/prompt.hpp"

namespace seadapt {

using json = nlohmann::ordered_json;

namespace {

constexpr int kCacheVersion = 1;

std::string header_for(const EmbeddingProvider& provider) {
  json h;
  h["format"] = "seadapt-embeddings";
  h["version"] = kCacheVersion;
  h["provider"] = provider.identity();
  h["d_e"] = provider.embed_dim();
  h["normalized"] = true;
  return h.dump();
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path file,
                               const EmbeddingProvider& provider)
    : file_(std::move(file)), header_line_(header_for(provider)) {
  bool reusable = false;
  if (std::filesystem::exists(file_)) {
    std::ifstream is(file_);
    std::string line;
    if (std::getline(is, line) && line == header_line_) {
      reusable = true;
      std::size_t row = 1;
      while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::exception& e) {
          fail("embedding cache ", file_.string(), " row ", row, ": ",
               e.what());
        }
        require(j.contains("key") && j.contains("values") &&
                    j["values"].is_array(),
                "embedding cache ", file_.string(), " row ", row,
                ": record needs key and values");
        const auto& vals = j["values"];
        Eigen::VectorXd v(static_cast<int>(vals.size()));
        for (int i = 0; i < v.size(); ++i) v[i] = vals[i].get<double>();
        require(v.size() == provider.embed_dim(), "embedding cache ",
                file_.string(), " row ", row, ": dimension ", v.size(),
                " does not match provider dimension ", provider.embed_dim());
        entries_[j["key"].get<std::string>()] = std::move(v);
      }
    }
  }
  if (reusable) {
    appender_.open(file_, std::ios::app);
  } else {
    // Missing, stale, or written by another provider: start fresh.
    if (!file_.parent_path().empty())
      std::filesystem::create_directories(file_.parent_path());
    appender_.open(file_, std::ios::trunc);
    require(appender_.good(), "embedding cache ", file_.string(),
            ": cannot open for write");
    appender_ << header_line_ << "\n";
  }
  require(appender_.good(), "embedding cache ", file_.string(),
          ": cannot open for append");
}

EmbeddingCache::~EmbeddingCache() { flush(); }

std::optional<Eigen::VectorXd> EmbeddingCache::lookup(
    const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::store(const std::string& key,
                           const Eigen::VectorXd& values) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (entries_.count(key)) return;
  entries_[key] = values;
  json j;
  j["key"] = key;
  json arr = json::array();
  for (int i = 0; i < values.size(); ++i) arr.push_back(values[i]);
  j["values"] = arr;
  appender_ << j.dump() << "\n";
}

void EmbeddingCache::flush() {
  std::lock_guard<std::mutex> lock(mutex_);
  appender_.flush();
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

std::string EmbeddingCache::text_key(const std::string& prompt) {
  return "text:" + prompt;
}

std::string EmbeddingCache::image_key(const std::string& sample_id) {
  return "image:" + sample_id;
}

TextEmbeddingTable text_embedding_table(
    EmbeddingProvider& provider, const std::vector<std::string>& label_space,
    const std::vector<WeatherCondition>& weathers,
    const std::string& template_text, EmbeddingCache* cache) {
  require(!label_space.empty(), "text table: empty label space");
  require(!weathers.empty(), "text table: empty weather set");

  TextEmbeddingTable table;
  for (const auto& class_name : label_space) {
    for (const auto w : weathers) {
      const std::string prompt = render_prompt(
          {template_text, class_name, weather_phrase(w)});
      const std::string key = EmbeddingCache::text_key(prompt);

      Eigen::VectorXd v;
      if (cache) {
        if (auto hit = cache->lookup(key)) v = std::move(*hit);
      }
      if (v.size() == 0) {
        EmbeddingVector e;
        try {
          e = provider.embed_text(prompt);
        } catch (const std::exception& ex) {
          fail("text table: provider failed on prompt '", prompt,
               "': ", ex.what());
        }
        require(e.dim() == provider.embed_dim(),
                "text table: provider returned dimension ", e.dim(),
                " for prompt '", prompt, "', expected ", provider.embed_dim());
        v = std::move(e.values);
        if (cache) cache->store(key, v);
      }
      table[{class_name, w}] = std::move(v);
    }
  }
  if (cache) cache->flush();
  return table;
}

}  // namespace seadapt
