// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "seadapt/common.hpp"

namespace seadapt {

using json = nlohmann::ordered_json;

std::string_view domain_tag(Domain d) {
  return d == Domain::source ? "source" : "target";
}

Domain parse_domain(std::string_view tag) {
  if (tag == "source") return Domain::source;
  if (tag == "target") return Domain::target;
  fail("unknown domain '", std::string(tag), "' (expected source or target)");
}

const std::array<WeatherCondition, kWeatherCount>& all_weather_conditions() {
  static const std::array<WeatherCondition, kWeatherCount> all = {
      WeatherCondition::sunny, WeatherCondition::cloudy,
      WeatherCondition::foggy, WeatherCondition::rainstorm,
      WeatherCondition::sunset_night};
  return all;
}

WeatherCondition parse_weather(std::string_view tag) {
  if (tag == "sunny") return WeatherCondition::sunny;
  if (tag == "cloudy") return WeatherCondition::cloudy;
  if (tag == "foggy") return WeatherCondition::foggy;
  if (tag == "rainstorm") return WeatherCondition::rainstorm;
  if (tag == "sunset_night") return WeatherCondition::sunset_night;
  fail("unknown weather '", std::string(tag),
       "' (expected one of sunny, cloudy, foggy, rainstorm, sunset_night)");
}

std::string_view weather_tag(WeatherCondition w) {
  switch (w) {
    case WeatherCondition::sunny: return "sunny";
    case WeatherCondition::cloudy: return "cloudy";
    case WeatherCondition::foggy: return "foggy";
    case WeatherCondition::rainstorm: return "rainstorm";
    case WeatherCondition::sunset_night: return "sunset_night";
  }
  fail("invalid WeatherCondition value");
}

std::string weather_phrase(WeatherCondition w) {
  if (w == WeatherCondition::sunset_night) return "sunset and night";
  return std::string(weather_tag(w));
}

namespace {

[[noreturn]] void row_fail(std::size_t row, const std::string& what) {
  fail("manifest row ", row, ": ", what);
}

// json access helpers that keep error messages tied to row and field.
std::string get_string(const json& j, const char* field, std::size_t row,
                       bool required) {
  if (!j.contains(field) || j[field].is_null()) {
    if (required) row_fail(row, concat("missing field '", field, "'"));
    return {};
  }
  if (!j[field].is_string())
    row_fail(row, concat("field '", field, "' must be a string"));
  return j[field].get<std::string>();
}

std::optional<double> get_unit_real(const json& j, const char* field,
                                    std::size_t row) {
  if (!j.contains(field) || j[field].is_null()) return std::nullopt;
  if (!j[field].is_number())
    row_fail(row, concat("field '", field, "' must be a number"));
  const double v = j[field].get<double>();
  if (v < 0.0 || v > 1.0)
    row_fail(row, concat("field '", field, "' must lie in [0,1], got ",
                         std::to_string(v)));
  return v;
}

}  // namespace

DomainManifest DomainManifest::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), "manifest ", path.string(), ": cannot open");

  std::string line;
  std::size_t row = 0;

  // Header line: {"label_space": [...], "weather_tags": [...]}.
  require(static_cast<bool>(std::getline(is, line)), "manifest ",
          path.string(), ": empty file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    fail("manifest ", path.string(), ": bad header: ", e.what());
  }
  require(header.is_object() && header.contains("label_space") &&
              header["label_space"].is_array(),
          "manifest ", path.string(),
          ": header must declare a label_space array");

  DomainManifest m;
  m.base_dir_ = path.parent_path();
  for (const auto& name : header["label_space"]) {
    require(name.is_string(), "manifest header: label_space entries must be "
                              "strings");
    m.label_space_.push_back(name.get<std::string>());
  }
  require(!m.label_space_.empty(), "manifest header: label_space is empty");
  {
    std::set<std::string> uniq(m.label_space_.begin(), m.label_space_.end());
    require(uniq.size() == m.label_space_.size(),
            "manifest header: duplicate class names in label_space");
  }
  require(header.contains("weather_tags") && header["weather_tags"].is_array(),
          "manifest ", path.string(),
          ": header must declare the weather_tags array");
  {
    std::set<std::string> declared;
    for (const auto& t : header["weather_tags"])
      declared.insert(t.get<std::string>());
    std::set<std::string> expected;
    for (const auto w : all_weather_conditions())
      expected.insert(std::string(weather_tag(w)));
    require(declared == expected, "manifest header: weather_tags must be "
                                  "exactly the five supported tags");
  }

  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      row_fail(row, concat("parse error: ", e.what()));
    }
    if (!j.is_object()) row_fail(row, "record must be an object");

    SampleRecord r;
    r.id = get_string(j, "id", row, true);
    r.image_ref = get_string(j, "image", row, true);
    r.domain = [&] {
      const std::string d = get_string(j, "domain", row, true);
      try {
        return parse_domain(d);
      } catch (const Error& e) {
        row_fail(row, e.what());
      }
    }();
    if (const std::string c = get_string(j, "class", row, false); !c.empty()) {
      const auto it =
          std::find(m.label_space_.begin(), m.label_space_.end(), c);
      if (it == m.label_space_.end())
        row_fail(row, concat("field 'class': '", c, "' not in label_space"));
      r.class_label = static_cast<int>(it - m.label_space_.begin());
    }
    if (const std::string w = get_string(j, "weather", row, false);
        !w.empty()) {
      try {
        r.weather = parse_weather(w);
      } catch (const Error& e) {
        row_fail(row, concat("field 'weather': ", e.what()));
      }
    }
    r.prior_quality = get_unit_real(j, "prior_quality", row);
    r.prior_score = get_unit_real(j, "prior_score", row);

    if (m.index_by_id_.count(r.id))
      row_fail(row, concat("duplicate id '", r.id, "'"));
    m.index_by_id_[r.id] = m.records_.size();
    m.records_.push_back(std::move(r));
  }
  m.validate_and_quarantine();
  return m;
}

DomainManifest DomainManifest::from_records(
    std::vector<std::string> label_space, std::vector<SampleRecord> records,
    std::filesystem::path base_dir) {
  require(!label_space.empty(), "manifest: label_space is empty");
  DomainManifest m;
  m.label_space_ = std::move(label_space);
  m.records_ = std::move(records);
  m.base_dir_ = std::move(base_dir);
  for (std::size_t i = 0; i < m.records_.size(); ++i) {
    require(m.index_by_id_.count(m.records_[i].id) == 0,
            "manifest: duplicate id '", m.records_[i].id, "'");
    m.index_by_id_[m.records_[i].id] = i;
  }
  m.validate_and_quarantine();
  return m;
}

void DomainManifest::validate_and_quarantine() {
  const int k = class_count();
  std::size_t row = 0;
  for (auto& r : records_) {
    ++row;
    require(!r.id.empty(), "manifest row ", row, ": empty id");
    require(!r.image_ref.empty(), "manifest row ", row, " (", r.id,
            "): empty image reference");
    if (r.class_label) {
      require(*r.class_label >= 0 && *r.class_label < k, "manifest row ", row,
              " (", r.id, "): class index ", *r.class_label,
              " outside label space of size ", k);
    }
    if (r.domain == Domain::source) {
      require(r.class_label.has_value(), "manifest row ", row, " (", r.id,
              "): source record requires class");
      require(r.weather.has_value(), "manifest row ", row, " (", r.id,
              "): source record requires weather");
    } else if (r.class_label) {
      // Target labels exist only for evaluation; strip them off the record
      // so nothing on the training path can observe them.
      eval_labels_[r.id] = *r.class_label;
      r.class_label.reset();
    }
  }
}

void DomainManifest::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  require(os.good(), "manifest ", path.string(), ": cannot open for write");

  json header;
  header["label_space"] = label_space_;
  json tags = json::array();
  for (const auto w : all_weather_conditions())
    tags.push_back(std::string(weather_tag(w)));
  header["weather_tags"] = tags;
  os << header.dump() << "\n";

  for (const auto& r : records_) {
    json j;
    j["id"] = r.id;
    j["image"] = r.image_ref;
    std::optional<int> label = r.class_label;
    if (!label) {
      // Round-trip held-out target labels.
      if (const auto it = eval_labels_.find(r.id); it != eval_labels_.end())
        label = it->second;
    }
    if (label) j["class"] = label_space_[static_cast<std::size_t>(*label)];
    if (r.weather) j["weather"] = std::string(weather_tag(*r.weather));
    if (r.prior_quality) j["prior_quality"] = *r.prior_quality;
    if (r.prior_score) j["prior_score"] = *r.prior_score;
    j["domain"] = std::string(domain_tag(r.domain));
    os << j.dump() << "\n";
  }
  require(os.good(), "manifest ", path.string(), ": write failed");
}

int DomainManifest::count(Domain d) const {
  return static_cast<int>(
      std::count_if(records_.begin(), records_.end(),
                    [d](const SampleRecord& r) { return r.domain == d; }));
}

std::vector<const SampleRecord*> DomainManifest::domain_records(
    Domain d) const {
  std::vector<const SampleRecord*> out;
  for (const auto& r : records_)
    if (r.domain == d) out.push_back(&r);
  return out;
}

const SampleRecord* DomainManifest::find(const std::string& id) const {
  const auto it = index_by_id_.find(id);
  return it == index_by_id_.end() ? nullptr : &records_[it->second];
}

std::optional<int> DomainManifest::evaluation_label(
    const std::string& id) const {
  const auto it = eval_labels_.find(id);
  if (it == eval_labels_.end()) return std::nullopt;
  return it->second;
}

bool DomainManifest::fully_labeled_target() const {
  for (const auto& r : records_)
    if (r.domain == Domain::target && !eval_labels_.count(r.id)) return false;
  return true;
}

int DomainManifest::label_index(std::string_view name) const {
  const auto it = std::find(label_space_.begin(), label_space_.end(), name);
  require(it != label_space_.end(), "class '", std::string(name),
          "' not in label_space");
  return static_cast<int>(it - label_space_.begin());
}

std::vector<long> class_histogram(const DomainManifest& m, Domain d) {
  std::vector<long> hist(static_cast<std::size_t>(m.class_count()), 0);
  for (const auto& r : m.records()) {
    if (r.domain != d) continue;
    std::optional<int> label = r.class_label;
    if (d == Domain::target) {
      label = m.evaluation_label(r.id);
      require(label.has_value(), "class_histogram over target: record '", r.id,
              "' has no held-out label");
    }
    ++hist[static_cast<std::size_t>(*label)];
  }
  return hist;
}

DomainManifest merge_manifests(const DomainManifest& a,
                               const DomainManifest& b) {
  require(a.label_space() == b.label_space(),
          "cannot merge manifests: label spaces differ");
  std::vector<SampleRecord> records;
  const auto absorb = [&records](const DomainManifest& m) {
    for (const SampleRecord& rec : m.records()) {
      SampleRecord copy = rec;
      if (!copy.class_label && copy.domain == Domain::target) {
        copy.class_label = m.evaluation_label(copy.id);
      }
      const auto colon = copy.image_ref.rfind(':');
      if (colon != std::string::npos && !m.base_dir().empty()) {
        const std::filesystem::path file(copy.image_ref.substr(0, colon));
        if (file.is_relative()) {
          copy.image_ref =
              (m.base_dir() / file).string() + copy.image_ref.substr(colon);
        }
      }
      records.push_back(std::move(copy));
    }
  };
  absorb(a);
  absorb(b);
  return DomainManifest::from_records(a.label_space(), std::move(records), {});
}

}  // namespace seadapt
