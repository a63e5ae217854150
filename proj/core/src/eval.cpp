// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "seadapt/common.hpp"

namespace seadapt {
namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Runs `fn` over records in chunks, feeding it (chunk, probs-or-features).
template <typename Forward>
void for_each_chunk(Model& model, const ImageStore& store,
                    const std::vector<const SampleRecord*>& records, int batch,
                    Forward&& fn) {
  require(batch >= 1, "evaluation batch size must be positive, got ", batch);
  const ImageDims dims = model.config().backbone.image_dims();
  for (std::size_t begin = 0; begin < records.size();
       begin += static_cast<std::size_t>(batch)) {
    const std::size_t end =
        std::min(records.size(), begin + static_cast<std::size_t>(batch));
    std::vector<std::string> refs;
    for (std::size_t i = begin; i < end; ++i)
      refs.push_back(records[i]->image_ref);
    const ad::Mat images = store.batch(refs);
    require(images.cols() == dims.pixels(), "image tensors are ",
            images.cols(), " pixels but the backbone expects ", dims.pixels());
    fn(begin, end, images);
  }
}

}  // namespace

int argmax_row(const Eigen::RowVectorXd& row) {
  require(row.size() > 0, "argmax of an empty row");
  int best = 0;
  for (int i = 1; i < row.size(); ++i)
    if (row(i) > row(best)) best = i;
  return best;
}

ad::Mat predict_probs(Model& model, const ImageStore& store,
                      const std::vector<const SampleRecord*>& records,
                      int batch) {
  ad::Mat out(records.size(), model.config().classes);
  Rng unused(0);
  for_each_chunk(model, store, records, batch,
                 [&](std::size_t begin, std::size_t end, const ad::Mat& images) {
                   Graph g(false);
                   Var x = g.input(images);
                   Var features = model.f.forward(g, x).features;
                   Var enhanced = model.g(g, features);
                   Var probs = model.c.probs(g, enhanced, false, unused);
                   out.middleRows(static_cast<Eigen::Index>(begin),
                                  static_cast<Eigen::Index>(end - begin)) =
                       g.value(probs);
                 });
  return out;
}

EvalResult evaluate(Model& model, const DomainManifest& manifest, int batch) {
  const auto records = manifest.domain_records(Domain::target);
  require(!records.empty(), "evaluation manifest has no target records");

  const int k = manifest.class_count();
  std::vector<int> labels;
  std::vector<WeatherCondition> weathers;
  for (const SampleRecord* r : records) {
    const auto label = manifest.evaluation_label(r->id);
    require(label.has_value(), "evaluation record '", r->id,
            "' has no held-out label");
    require(r->weather.has_value(), "evaluation record '", r->id,
            "' has no weather tag");
    labels.push_back(*label);
    weathers.push_back(*r->weather);
  }

  const ImageStore store(manifest.base_dir());
  const ad::Mat probs = predict_probs(model, store, records, batch);

  EvalResult res;
  res.label_space = manifest.label_space();
  res.n_eval = static_cast<int>(records.size());
  res.confusion.assign(k, std::vector<long>(k, 0));

  std::map<WeatherCondition, std::pair<long, long>> weather_counts;
  long correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int pred = argmax_row(probs.row(static_cast<Eigen::Index>(i)));
    const int truth = labels[i];
    res.confusion[truth][pred]++;
    auto& wc = weather_counts[weathers[i]];
    wc.second++;
    if (pred == truth) {
      ++correct;
      wc.first++;
    }
  }

  res.overall_acc = static_cast<double>(correct) / res.n_eval;
  double macro_sum = 0.0;
  int macro_n = 0;
  for (int c = 0; c < k; ++c) {
    long row_total = 0;
    for (int p = 0; p < k; ++p) row_total += res.confusion[c][p];
    if (row_total == 0) continue;
    const double acc = static_cast<double>(res.confusion[c][c]) / row_total;
    res.per_class[manifest.label_space()[c]] = acc;
    macro_sum += acc;
    ++macro_n;
  }
  res.macro_acc = macro_n > 0 ? macro_sum / macro_n : 0.0;
  for (const auto& [w, counts] : weather_counts) {
    res.per_weather[std::string(weather_tag(w))] =
        static_cast<double>(counts.first) / counts.second;
  }
  return res;
}

double discriminator_accuracy(Model& model, const ImageStore& store,
                              const std::vector<const SampleRecord*>& records,
                              int batch) {
  require(!records.empty(), "discriminator probe needs records");
  long correct = 0;
  for_each_chunk(model, store, records, batch,
                 [&](std::size_t begin, std::size_t end, const ad::Mat& images) {
                   Graph g(false);
                   Var x = g.input(images);
                   Var features = model.f.forward(g, x).features;
                   Var dprobs = model.d.probs(g, features, std::nullopt);
                   const ad::Mat& q = g.value(dprobs);
                   for (std::size_t i = begin; i < end; ++i) {
                     const int pred = argmax_row(
                         q.row(static_cast<Eigen::Index>(i - begin)));
                     const int truth =
                         records[i]->domain == Domain::source ? 0 : 1;
                     if (pred == truth) ++correct;
                   }
                 });
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

void write_eval_result(const std::filesystem::path& path, const EvalResult& r) {
  ordered_json j;
  j["n_eval"] = r.n_eval;
  j["overall_acc"] = r.overall_acc;
  j["macro_acc"] = r.macro_acc;
  j["label_space"] = r.label_space;
  j["per_class"] = ordered_json::object();
  for (const auto& [name, acc] : r.per_class) j["per_class"][name] = acc;
  j["per_weather"] = ordered_json::object();
  for (const auto& [name, acc] : r.per_weather) j["per_weather"][name] = acc;
  j["confusion"] = r.confusion;
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), "cannot write eval result to ", path.string());
  out << j.dump(2) << "\n";
  require(out.good(), "failed writing eval result to ", path.string());
}

EvalResult read_eval_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open eval result ", path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail("eval result ", path.string(), ": ", e.what());
  }
  EvalResult r;
  try {
    r.n_eval = j.at("n_eval").get<int>();
    r.overall_acc = j.at("overall_acc").get<double>();
    r.macro_acc = j.at("macro_acc").get<double>();
    r.label_space = j.at("label_space").get<std::vector<std::string>>();
    for (const auto& [name, acc] : j.at("per_class").items())
      r.per_class[name] = acc.get<double>();
    for (const auto& [name, acc] : j.at("per_weather").items())
      r.per_weather[name] = acc.get<double>();
    r.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
  } catch (const nlohmann::json::exception& e) {
    fail("eval result ", path.string(), ": ", e.what());
  }
  return r;
}

RunComparison compare_runs(
    const std::vector<std::pair<std::string, EvalResult>>& runs) {
  require(!runs.empty(), "compare_runs needs at least one result");
  const auto& labels = runs.front().second.label_space;
  for (const auto& [name, r] : runs) {
    require(r.label_space == labels, "run '", name,
            "' has a different label space");
  }

  RunComparison cmp;
  for (const auto& [name, r] : runs) cmp.run_names.push_back(name);

  const auto add_row = [&](const std::string& section, const std::string& name,
                           auto&& value_of) {
    ComparisonRow row;
    row.section = section;
    row.name = name;
    for (const auto& [rn, r] : runs) row.values.push_back(value_of(r));
    row.delta = row.values.back() - row.values.front();
    cmp.rows.push_back(std::move(row));
  };

  add_row("overall", "overall",
          [](const EvalResult& r) { return r.overall_acc; });
  add_row("macro", "macro", [](const EvalResult& r) { return r.macro_acc; });
  for (const auto& cls : labels) {
    add_row("class", cls, [&cls](const EvalResult& r) {
      const auto it = r.per_class.find(cls);
      return it == r.per_class.end() ? 0.0 : it->second;
    });
  }
  for (const WeatherCondition w : all_weather_conditions()) {
    const std::string tag(weather_tag(w));
    bool present = false;
    for (const auto& [rn, r] : runs) present |= r.per_weather.count(tag) > 0;
    if (!present) continue;
    add_row("weather", tag, [&tag](const EvalResult& r) {
      const auto it = r.per_weather.find(tag);
      return it == r.per_weather.end() ? 0.0 : it->second;
    });
  }
  return cmp;
}

std::string comparison_text(const RunComparison& c) {
  std::size_t name_width = 8;
  for (const auto& row : c.rows)
    name_width = std::max(name_width, row.section.size() + row.name.size() + 1);

  std::string out;
  const auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  out += pad("metric", name_width + 2);
  for (const auto& name : c.run_names) out += pad(name, 12);
  out += "delta\n";
  for (const auto& row : c.rows) {
    const std::string label = row.section == row.name
                                  ? row.name
                                  : concat(row.section, "/", row.name);
    out += pad(label, name_width + 2);
    for (const double v : row.values) out += pad(fmt(v), 12);
    out += (row.delta >= 0 ? "+" : "") + fmt(row.delta);
    out += "\n";
  }
  return out;
}

std::string comparison_csv(const RunComparison& c) {
  std::string out = "metric";
  for (const auto& name : c.run_names) out += "," + name;
  out += ",delta\n";
  for (const auto& row : c.rows) {
    out += row.section == row.name ? row.name
                                   : concat(row.section, "/", row.name);
    for (const double v : row.values) out += "," + fmt(v);
    out += "," + fmt(row.delta) + "\n";
  }
  return out;
}

}  // namespace seadapt
