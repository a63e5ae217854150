// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry points: prepare-manifest, embed-cache, score-prior,
// train, evaluate, report. Exit codes: 0 success, 1 runtime failure,
// 2 usage or configuration error.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "seadapt/common.hpp"
#include "seadapt/config.hpp"
#include "seadapt/curriculum.hpp"
#include "seadapt/embedding_cache.hpp"
#include "seadapt/eval.hpp"
#include "seadapt/synthetic.hpp"
#include "seadapt/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Every run leaves a record of exactly how it was invoked next to its
// outputs, so it can be reproduced from the record alone.
void write_invocation(const fs::path& out_dir, const std::string& subcommand,
                      const std::vector<std::string>& argv, std::uint64_t seed,
                      const ordered_json& config) {
  fs::create_directories(out_dir);
  ordered_json j;
  j["subcommand"] = subcommand;
  j["argv"] = argv;
  j["seed"] = seed;
  j["config"] = config;
  std::ofstream out(out_dir / "invocation.json", std::ios::trunc);
  seadapt::require(out.good(), "cannot write invocation record under ",
                   out_dir.string());
  out << j.dump(2) << "\n";
}

struct PrepareArgs {
  std::string out_dir;
  std::uint64_t seed = 7;
  int source_count = 1000;
  int target_count = 1000;
  int image_size = 32;
  seadapt::ToyBenchmarkConfig defaults;
  double source_severity_lo = defaults.source_severity_lo;
  double source_severity_hi = defaults.source_severity_hi;
  double target_severity_lo = defaults.target_severity_lo;
  double target_severity_hi = defaults.target_severity_hi;
  double source_noise_fraction = defaults.source_noise_fraction;
  double style_gamma = defaults.style_gamma;
  double style_scale = defaults.style_scale;
  double style_offset = defaults.style_offset;
  std::vector<double> source_weather_mix;
  std::vector<double> target_weather_mix;
};

int cmd_prepare(const PrepareArgs& a, const std::vector<std::string>& argv) {
  seadapt::ToyBenchmarkConfig cfg;
  cfg.n_source = a.source_count;
  cfg.n_target = a.target_count;
  cfg.image_size = a.image_size;
  cfg.seed = a.seed;
  cfg.source_severity_lo = a.source_severity_lo;
  cfg.source_severity_hi = a.source_severity_hi;
  cfg.target_severity_lo = a.target_severity_lo;
  cfg.target_severity_hi = a.target_severity_hi;
  cfg.source_noise_fraction = a.source_noise_fraction;
  cfg.style_gamma = a.style_gamma;
  cfg.style_scale = a.style_scale;
  cfg.style_offset = a.style_offset;
  cfg.source_weather_mix = a.source_weather_mix;
  cfg.target_weather_mix = a.target_weather_mix;

  const auto paths = seadapt::generate_toy_benchmark(a.out_dir, cfg);

  ordered_json c;
  c["out_dir"] = a.out_dir;
  c["source_count"] = a.source_count;
  c["target_count"] = a.target_count;
  c["image_size"] = a.image_size;
  c["source_severity"] = {cfg.source_severity_lo, cfg.source_severity_hi};
  c["target_severity"] = {cfg.target_severity_lo, cfg.target_severity_hi};
  c["source_noise_fraction"] = cfg.source_noise_fraction;
  c["style"] = {cfg.style_gamma, cfg.style_scale, cfg.style_offset};
  write_invocation(a.out_dir, "prepare-manifest", argv, a.seed, c);

  std::cout << "wrote " << paths.source_manifest.string() << "\n"
            << "wrote " << paths.target_manifest.string() << "\n";
  return 0;
}

struct EmbedCacheArgs {
  std::string manifest;
  std::string cache;
  std::string provider = "toy-frozen";
  int dim = 64;
  std::uint64_t provider_seed = 17;
  std::string prompt_template = "A photo of a {class} in {domain}";
  bool images = false;
};

int cmd_embed_cache(const EmbedCacheArgs& a,
                    const std::vector<std::string>& argv) {
  const auto manifest = seadapt::DomainManifest::load(a.manifest);
  const auto provider =
      seadapt::make_provider(a.provider, a.dim, a.provider_seed);
  seadapt::EmbeddingCache cache(a.cache, *provider);

  const std::vector<seadapt::WeatherCondition> weathers(
      seadapt::all_weather_conditions().begin(),
      seadapt::all_weather_conditions().end());
  const auto table = seadapt::text_embedding_table(
      *provider, manifest.label_space(), weathers, a.prompt_template, &cache);

  std::size_t image_count = 0;
  if (a.images) {
    const seadapt::ImageStore store(manifest.base_dir());
    for (const auto& rec : manifest.records()) {
      const std::string key = seadapt::EmbeddingCache::image_key(rec.id);
      if (cache.lookup(key)) continue;
      const auto v = seadapt::image_embedding(
          *provider, store.image(rec.image_ref), store.dims(rec.image_ref));
      cache.store(key, v.values);
      ++image_count;
    }
  }
  cache.flush();

  const fs::path out_dir = fs::path(a.cache).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(a.cache).parent_path();
  ordered_json c;
  c["manifest"] = a.manifest;
  c["cache"] = a.cache;
  c["provider"] = a.provider;
  c["dim"] = a.dim;
  c["provider_seed"] = a.provider_seed;
  c["prompt_template"] = a.prompt_template;
  c["images"] = a.images;
  write_invocation(out_dir, "embed-cache", argv, a.provider_seed, c);

  std::cout << "cached " << table.size() << " prompts";
  if (a.images) std::cout << " and " << image_count << " new image embeddings";
  std::cout << " in " << a.cache << "\n";
  return 0;
}

struct ScorePriorArgs {
  std::string manifest;
  std::string out;
};

int cmd_score_prior(const ScorePriorArgs& a,
                    const std::vector<std::string>& argv) {
  const auto manifest = seadapt::DomainManifest::load(a.manifest);

  std::vector<seadapt::SampleRecord> records;
  std::size_t scored = 0;
  for (const auto& rec : manifest.records()) {
    seadapt::SampleRecord copy = rec;
    // Reinstate held-out labels so the output round-trips.
    if (!copy.class_label && copy.domain == seadapt::Domain::target)
      copy.class_label = manifest.evaluation_label(copy.id);
    if (copy.prior_quality && copy.weather) {
      copy.prior_score =
          seadapt::prior_score(*copy.prior_quality, *copy.weather);
      ++scored;
    }
    // Keep image references valid if the copy lands in another directory.
    const auto colon = copy.image_ref.rfind(':');
    if (colon != std::string::npos) {
      const fs::path file(copy.image_ref.substr(0, colon));
      const fs::path out_base = fs::absolute(a.out).parent_path();
      if (file.is_relative() &&
          !fs::equivalent(manifest.base_dir(), out_base)) {
        copy.image_ref = (fs::absolute(manifest.base_dir()) / file).string() +
                         copy.image_ref.substr(colon);
      }
    }
    records.push_back(std::move(copy));
  }
  if (scored == 0) {
    seadapt::fail_config(
        "manifest ", a.manifest,
        " carries no prior_quality values and no quality provider is "
        "configured");
  }

  const auto out =
      seadapt::DomainManifest::from_records(manifest.label_space(), records,
                                            manifest.base_dir());
  out.save(a.out);

  const fs::path out_dir = fs::path(a.out).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(a.out).parent_path();
  ordered_json c;
  c["manifest"] = a.manifest;
  c["out"] = a.out;
  write_invocation(out_dir, "score-prior", argv, 0, c);

  std::cout << "scored " << scored << " of " << records.size()
            << " records into " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string out_dir;
  std::string ablation;
  std::string resume;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  seadapt::TrainConfig cfg = seadapt::load_train_config(a.config);
  if (!a.ablation.empty()) seadapt::apply_ablation(cfg, a.ablation);
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      seadapt::fail_config("--set expects key=value, got '", kv, "'");
    seadapt::set_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed_given) cfg.seed = a.seed;
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (!a.resume.empty()) cfg.resume = a.resume;
  cfg.validate();

  const auto manifest = seadapt::load_train_manifests(cfg);
  write_invocation(cfg.out_dir, "train", argv, cfg.seed,
                   ordered_json::parse(seadapt::config_json(cfg)));

  seadapt::Trainer trainer(std::move(cfg), manifest);
  trainer.fit();

  const auto& c = trainer.config();
  std::cout << "trained " << trainer.state().epoch << " epochs ("
            << trainer.state().iteration << " steps); metrics in "
            << (c.out_dir / "metrics.jsonl").string() << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out_dir = ".";
  int batch = 64;
};

int cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
  const auto header = seadapt::read_checkpoint_header(a.checkpoint);
  seadapt::Model model(header.config);
  seadapt::load_checkpoint(a.checkpoint, model);

  const auto manifest = seadapt::DomainManifest::load(a.manifest);
  seadapt::require(manifest.class_count() == header.config.classes,
                   "checkpoint was trained over ", header.config.classes,
                   " classes but the manifest declares ",
                   manifest.class_count());

  const auto result = seadapt::evaluate(model, manifest, a.batch);
  fs::create_directories(a.out_dir);
  seadapt::write_eval_result(fs::path(a.out_dir) / "eval.json", result);

  ordered_json c;
  c["checkpoint"] = a.checkpoint;
  c["manifest"] = a.manifest;
  c["out_dir"] = a.out_dir;
  c["batch"] = a.batch;
  write_invocation(a.out_dir, "evaluate", argv, header.state.seed, c);

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", result.overall_acc);
  std::cout << "overall accuracy: " << buf << " over " << result.n_eval
            << " samples\n";
  return 0;
}

struct ReportArgs {
  std::string out_dir;
  std::vector<std::string> runs;  // name=path
};

int cmd_report(const ReportArgs& a, const std::vector<std::string>& argv) {
  std::vector<std::pair<std::string, seadapt::EvalResult>> results;
  for (const auto& spec : a.runs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      seadapt::fail_config("run spec must be name=path, got '", spec, "'");
    results.emplace_back(spec.substr(0, eq),
                         seadapt::read_eval_result(spec.substr(eq + 1)));
  }
  const auto cmp = seadapt::compare_runs(results);
  const std::string text = seadapt::comparison_text(cmp);
  const std::string csv = seadapt::comparison_csv(cmp);

  fs::create_directories(a.out_dir);
  for (const auto& [name, content] :
       {std::pair<std::string, const std::string&>{"comparison.txt", text},
        {"comparison.csv", csv}}) {
    std::ofstream out(fs::path(a.out_dir) / name, std::ios::trunc);
    seadapt::require(out.good(), "cannot write ", name, " under ", a.out_dir);
    out << content;
  }

  ordered_json c;
  c["out_dir"] = a.out_dir;
  c["runs"] = a.runs;
  write_invocation(a.out_dir, "report", argv, 0, c);

  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"domain-adaptive maritime image classification workbench"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* prepare = app.add_subcommand(
      "prepare-manifest", "Generate the two-domain toy shape benchmark");
  prepare->add_option("--out-dir", prep.out_dir, "Output directory")
      ->required();
  prepare->add_option("--seed", prep.seed, "Generator seed");
  prepare->add_option("--source-count", prep.source_count,
                      "Source domain sample count");
  prepare->add_option("--target-count", prep.target_count,
                      "Target domain sample count");
  prepare->add_option("--image-size", prep.image_size,
                      "Square image edge length");
  prepare->add_option("--source-severity-lo", prep.source_severity_lo,
                      "Source corruption severity lower bound");
  prepare->add_option("--source-severity-hi", prep.source_severity_hi,
                      "Source corruption severity upper bound");
  prepare->add_option("--target-severity-lo", prep.target_severity_lo,
                      "Target corruption severity lower bound");
  prepare->add_option("--target-severity-hi", prep.target_severity_hi,
                      "Target corruption severity upper bound");
  prepare->add_option("--source-noise-fraction", prep.source_noise_fraction,
                      "Fraction of source samples rendered near-unreadable");
  prepare->add_option("--style-gamma", prep.style_gamma,
                      "Target style shift: gamma curve exponent");
  prepare->add_option("--style-scale", prep.style_scale,
                      "Target style shift: intensity scale");
  prepare->add_option("--style-offset", prep.style_offset,
                      "Target style shift: intensity offset");
  prepare
      ->add_option("--source-weather-mix", prep.source_weather_mix,
                   "Source weather proportions: sunny,cloudy,foggy,rain,night")
      ->delimiter(',')
      ->expected(0, 5);
  prepare
      ->add_option("--target-weather-mix", prep.target_weather_mix,
                   "Target weather proportions: sunny,cloudy,foggy,rain,night")
      ->delimiter(',')
      ->expected(0, 5);

  EmbedCacheArgs emb;
  auto* embed = app.add_subcommand(
      "embed-cache", "Precompute frozen-teacher embeddings into a cache file");
  embed->add_option("--manifest", emb.manifest, "Manifest supplying the label space")
      ->required()
      ->check(CLI::ExistingFile);
  embed->add_option("--cache", emb.cache, "Cache file to create or extend")
      ->required();
  embed->add_option("--provider", emb.provider, "hash or toy-frozen");
  embed->add_option("--dim", emb.dim, "Embedding dimension");
  embed->add_option("--provider-seed", emb.provider_seed, "Provider seed");
  embed->add_option("--template", emb.prompt_template, "Prompt template");
  embed->add_flag("--images", emb.images,
                  "Also embed every record's image");

  ScorePriorArgs sp;
  auto* score = app.add_subcommand(
      "score-prior", "Write a manifest copy with weather-weighted priors");
  score->add_option("--manifest", sp.manifest, "Input manifest")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--out", sp.out, "Output manifest path")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Run the adaptation training loop");
  train->add_option("--config", tr.config, "key=value config file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = train->add_option("--seed", tr.seed, "Base seed override");
  train->add_option("--out-dir", tr.out_dir, "Output directory override");
  train->add_option("--ablation", tr.ablation,
                    "Preset: adversarial-only, input-offset, token-offset, "
                    "skd, or full");
  train->add_option("--resume", tr.resume, "Checkpoint to resume from")
      ->check(CLI::ExistingFile);
  train->add_option("--set", tr.sets, "Config override key=value (repeatable)");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a checkpoint on a labeled target manifest");
  evaluate->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--manifest", ev.manifest, "Manifest with held-out labels")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out-dir", ev.out_dir, "Output directory");
  evaluate->add_option("--batch", ev.batch, "Inference batch size");

  ReportArgs rep;
  auto* report = app.add_subcommand(
      "report", "Compare several evaluation results side by side");
  report->add_option("--out-dir", rep.out_dir, "Output directory")->required();
  report->add_option("runs", rep.runs, "Results as name=path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::vector<std::string> args(argv, argv + argc);
  try {
    if (app.got_subcommand(prepare)) return cmd_prepare(prep, args);
    if (app.got_subcommand(embed)) return cmd_embed_cache(emb, args);
    if (app.got_subcommand(score)) return cmd_score_prior(sp, args);
    if (app.got_subcommand(train)) {
      tr.seed_given = seed_opt->count() > 0;
      return cmd_train(tr, args);
    }
    if (app.got_subcommand(evaluate)) return cmd_evaluate(ev, args);
    if (app.got_subcommand(report)) return cmd_report(rep, args);
  } catch (const seadapt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const seadapt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
