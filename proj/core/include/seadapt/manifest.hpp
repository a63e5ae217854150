// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seadapt {

enum class Domain { source, target };

std::string_view domain_tag(Domain d);
Domain parse_domain(std::string_view tag);

// The five supported capture conditions. Parsing any other string fails.
enum class WeatherCondition { sunny, cloudy, foggy, rainstorm, sunset_night };

constexpr int kWeatherCount = 5;

const std::array<WeatherCondition, kWeatherCount>& all_weather_conditions();

WeatherCondition parse_weather(std::string_view tag);
std::string_view weather_tag(WeatherCondition w);

// Human-readable phrase used in prompts: sunset_night reads
// "sunset and night", everything else reads as its tag.
std::string weather_phrase(WeatherCondition w);

struct SampleRecord {
  std::string id;
  std::string image_ref;
  // Class index into the label space. Always set for source records. For
  // target records this is empty after load: any label that was present in
  // the file is quarantined behind DomainManifest::evaluation_label so
  // training code cannot depend on it.
  std::optional<int> class_label;
  std::optional<WeatherCondition> weather;
  // Raw image-quality score in [0, 1], unweighted.
  std::optional<double> prior_quality;
  // Weather-weighted prior score in [0, 1], as produced by the score-prior
  // tool. When absent, consumers derive it from prior_quality and weather.
  std::optional<double> prior_score;
  Domain domain = Domain::source;
};

// An immutable, validated view of one manifest file: a labeled source
// domain and an unlabeled target domain sharing one label space.
class DomainManifest {
 public:
  // Parses a line-delimited manifest: a header object declaring
  // `label_space` and `weather_tags`, then one record object per line with
  // fields `id`, `image`, `class`, `weather`, `prior_quality`,
  // `prior_score`, `domain`. Errors name the offending row and field.
  static DomainManifest load(const std::filesystem::path& path);

  // Assembles a manifest in memory (used by generators and tests). Target
  // records may carry class labels; they are quarantined exactly as in
  // load().
  static DomainManifest from_records(std::vector<std::string> label_space,
                                     std::vector<SampleRecord> records,
                                     std::filesystem::path base_dir = {});

  void save(const std::filesystem::path& path) const;

  const std::vector<SampleRecord>& records() const { return records_; }
  const std::vector<std::string>& label_space() const { return label_space_; }
  int class_count() const { return static_cast<int>(label_space_.size()); }

  int count(Domain d) const;
  int n_source() const { return count(Domain::source); }
  int n_target() const { return count(Domain::target); }

  std::vector<const SampleRecord*> domain_records(Domain d) const;

  const SampleRecord* find(const std::string& id) const;

  // Held-out label of a target record, for evaluation only. Empty when the
  // manifest carried no label for that id.
  std::optional<int> evaluation_label(const std::string& id) const;

  // True when every target record has a held-out label.
  bool fully_labeled_target() const;

  // Directory that image references resolve against (the manifest's own
  // directory after load; settable for in-memory manifests).
  const std::filesystem::path& base_dir() const { return base_dir_; }

  int label_index(std::string_view name) const;

 private:
  DomainManifest() = default;
  void validate_and_quarantine();

  std::vector<std::string> label_space_;
  std::vector<SampleRecord> records_;
  std::map<std::string, int> eval_labels_;
  std::map<std::string, std::size_t> index_by_id_;
  std::filesystem::path base_dir_;
};

// Per-class sample counts over one domain; classes with no samples appear
// with count 0. Counting the target domain requires held-out labels on all
// of its records.
std::vector<long> class_histogram(const DomainManifest& m, Domain d);

// Combines two manifests (typically one per domain) that share a label
// space. Relative image references are rebased onto each manifest's own
// directory, and held-out target labels survive the merge. Duplicate ids
// across the inputs are an error.
DomainManifest merge_manifests(const DomainManifest& a,
                               const DomainManifest& b);

}  // namespace seadapt
