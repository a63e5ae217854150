// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seadapt/manifest.hpp"
#include "seadapt/model.hpp"

namespace seadapt {

// Target-domain accuracy breakdown of one model snapshot.
struct EvalResult {
  double overall_acc = 0.0;  // micro: correct / n_eval
  double macro_acc = 0.0;    // mean of per-class accuracies
  std::vector<std::string> label_space;
  // Classes and conditions with at least one evaluation sample.
  std::map<std::string, double> per_class;
  std::map<std::string, double> per_weather;
  // confusion[true][predicted], sized K x K; entries sum to n_eval.
  std::vector<std::vector<long>> confusion;
  int n_eval = 0;
};

// Index of the row maximum; ties resolve to the lowest index.
int argmax_row(const Eigen::RowVectorXd& row);

// Batched inference probabilities (rows align with `records`). Dropout off,
// no perturbation.
ad::Mat predict_probs(Model& model, const ImageStore& store,
                      const std::vector<const SampleRecord*>& records,
                      int batch = 64);

// Evaluates the model on the manifest's target records. Every target
// record must carry a held-out label and a weather tag.
EvalResult evaluate(Model& model, const DomainManifest& manifest,
                    int batch = 64);

// Fraction of records whose discriminator domain call matches the record's
// domain (probe mode, no reversal). Used to watch alignment progress.
double discriminator_accuracy(Model& model, const ImageStore& store,
                              const std::vector<const SampleRecord*>& records,
                              int batch = 64);

void write_eval_result(const std::filesystem::path& path, const EvalResult& r);
EvalResult read_eval_result(const std::filesystem::path& path);

// Side-by-side view of several named results over one label space.
struct ComparisonRow {
  std::string section;  // overall | macro | class | weather
  std::string name;
  std::vector<double> values;  // one per run, input order
  double delta = 0.0;          // last - first
};

struct RunComparison {
  std::vector<std::string> run_names;
  std::vector<ComparisonRow> rows;
};

// Results must share a label space; values appear in the given run order.
RunComparison compare_runs(
    const std::vector<std::pair<std::string, EvalResult>>& runs);

// Fixed-width table for terminals.
std::string comparison_text(const RunComparison& c);

// Plot-ready columns: metric,<run...>,delta per line.
std::string comparison_csv(const RunComparison& c);

}  // namespace seadapt
