// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "seadapt/common.hpp"
#include "seadapt/config.hpp"
#include "seadapt/eval.hpp"
#include "seadapt/synthetic.hpp"
#include "seadapt/trainer.hpp"
#include "test_support.hpp"

using namespace seadapt;

namespace {

// One generated toy benchmark shared by every test in this binary.
struct Fixture {
  test::ScratchDir dir{"trainer-fixture"};
  ToyBenchmarkPaths paths;

  Fixture() {
    ToyBenchmarkConfig cfg;
    cfg.n_source = 48;
    cfg.n_target = 32;
    cfg.image_size = 16;
    paths = generate_toy_benchmark(dir.path(), cfg);
  }

  TrainConfig config(const std::filesystem::path& out) const {
    TrainConfig cfg;
    cfg.source_manifest = paths.source_manifest;
    cfg.target_manifest = paths.target_manifest;
    cfg.out_dir = out;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.image_size = 16;
    cfg.channels = 1;
    cfg.patch_size = 8;
    cfg.dim = 16;
    cfg.heads = 2;
    cfg.blocks = 2;
    cfg.mlp_hidden = 32;
    cfg.embed_dim = 16;
    cfg.disc_hidden = 16;
    cfg.alternate_blocks = {0, 1};
    cfg.adaptive_period = 10;
    cfg.seed = 5;
    return cfg;
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("config file parsing, overrides and validation") {
  test::ScratchDir dir("config-parse");
  const auto file = dir / "train.cfg";
  {
    std::ofstream f(file);
    f << "# a comment\n";
    f << "source_manifest = data/src.jsonl\n";
    f << "target_manifest = /abs/tgt.jsonl\n";
    f << "epochs = 4\n";
    f << "lr = 0.01\n";
    f << "alternate_blocks = 1, 3, 5\n";
    f << "skd = false\n";
  }
  const TrainConfig cfg = load_train_config(file);
  // Relative paths resolve against the config file's directory.
  CHECK(cfg.source_manifest == dir.path() / "data/src.jsonl");
  CHECK(cfg.target_manifest == std::filesystem::path("/abs/tgt.jsonl"));
  CHECK(cfg.epochs == 4);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.alternate_blocks == std::vector<int>{1, 3, 5});
  CHECK_FALSE(cfg.skd);
  CHECK(cfg.curriculum);  // untouched default
}

TEST_CASE("config errors name the offending line") {
  test::ScratchDir dir("config-bad");
  const auto dup = dir / "dup.cfg";
  {
    std::ofstream f(dup);
    f << "epochs = 4\nepochs = 5\n";
  }
  CHECK_THROWS_WITH_AS(load_train_config(dup), doctest::Contains(":2"),
                       ConfigError);

  const auto unknown = dir / "unknown.cfg";
  {
    std::ofstream f(unknown);
    f << "not_a_key = 1\n";
  }
  CHECK_THROWS_AS(load_train_config(unknown), ConfigError);

  const auto malformed = dir / "malformed.cfg";
  {
    std::ofstream f(malformed);
    f << "epochs four\n";
  }
  CHECK_THROWS_AS(load_train_config(malformed), ConfigError);

  CHECK_THROWS_AS(load_train_config(dir / "missing.cfg"), ConfigError);
}

TEST_CASE("set_config_key covers value types and rejects junk") {
  TrainConfig cfg;
  set_config_key(cfg, "kappa", "0.25");
  CHECK(cfg.kappa == 0.25);
  set_config_key(cfg, "curriculum", "0");
  CHECK_FALSE(cfg.curriculum);
  set_config_key(cfg, "max_steps", "50");
  CHECK(cfg.max_steps == 50);
  set_config_key(cfg, "offset_mode", "input");
  CHECK(cfg.offset_mode == "input");
  CHECK_THROWS_AS(set_config_key(cfg, "epochs", "two"), ConfigError);
  CHECK_THROWS_AS(set_config_key(cfg, "mystery", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_key(cfg, "skd", "maybe"), ConfigError);
}

TEST_CASE("config validation is a usage error, not a runtime error") {
  TrainConfig cfg;
  cfg.source_manifest = "s.jsonl";
  cfg.target_manifest = "t.jsonl";
  cfg.batch_size = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  TrainConfig cfg2;
  cfg2.source_manifest = "s.jsonl";
  cfg2.target_manifest = "t.jsonl";
  cfg2.offset_mode = "sideways";
  CHECK_THROWS_AS(cfg2.validate(), ConfigError);

  TrainConfig cfg3;
  cfg3.target_manifest = "t.jsonl";
  CHECK_THROWS_AS(cfg3.validate(), ConfigError);
}

TEST_CASE("ablation presets rewrite the mechanism toggles") {
  TrainConfig cfg;
  apply_ablation(cfg, "adversarial-only");
  CHECK_FALSE(cfg.skd);
  CHECK_FALSE(cfg.curriculum);
  CHECK(cfg.offset_mode == "none");
  CHECK_FALSE(cfg.offsets_enabled());
  CHECK(cfg.ablation == "adversarial-only");

  apply_ablation(cfg, "token-offset");
  CHECK(cfg.offset_mode == "token");
  CHECK_FALSE(cfg.skd);

  apply_ablation(cfg, "input-offset");
  CHECK(cfg.offset_mode == "input");

  apply_ablation(cfg, "skd");
  CHECK(cfg.skd);
  CHECK_FALSE(cfg.curriculum);

  apply_ablation(cfg, "full");
  CHECK(cfg.skd);
  CHECK(cfg.curriculum);
  CHECK(cfg.offset_mode == "token");

  CHECK_THROWS_AS(apply_ablation(cfg, "everything"), ConfigError);
}

TEST_CASE("config json echoes every field") {
  TrainConfig cfg;
  cfg.source_manifest = "a.jsonl";
  cfg.seed = 9;
  const std::string j = config_json(cfg);
  CHECK(j.find("\"source_manifest\":\"a.jsonl\"") != std::string::npos);
  CHECK(j.find("\"seed\":9") != std::string::npos);
  CHECK(j.find("\"alternate_blocks\":\"0,4,8\"") != std::string::npos);
  CHECK(j.find("\"ablation\":\"none\"") != std::string::npos);
}

TEST_CASE("load_train_manifests merges the two domain files") {
  const auto& fx = fixture();
  TrainConfig cfg = fx.config(fx.dir / "unused");
  const DomainManifest m = load_train_manifests(cfg);
  CHECK(m.n_source() == 48);
  CHECK(m.n_target() == 32);

  cfg.source_manifest = fx.dir / "nope.jsonl";
  CHECK_THROWS_AS(load_train_manifests(cfg), ConfigError);
}

TEST_CASE("trainer runs, logs metrics and writes checkpoints") {
  const auto& fx = fixture();
  test::ScratchDir out("trainer-run");
  TrainConfig cfg = fx.config(out / "run");
  const DomainManifest m = load_train_manifests(cfg);

  Trainer trainer(cfg, m);
  trainer.fit();

  CHECK(trainer.state().epoch == 2);
  CHECK(trainer.state().iteration ==
        static_cast<long>(trainer.history().size()));
  CHECK(std::filesystem::exists(out / "run" / "metrics.jsonl"));
  CHECK(std::filesystem::exists(out / "run" / "checkpoint-2.sdck"));
  CHECK(std::filesystem::exists(out / "run" / "checkpoint-final.sdck"));

  // One JSON line per step, all components finite.
  std::istringstream lines(slurp(out / "run" / "metrics.jsonl"));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    CHECK(line.find("\"focal\":") != std::string::npos);
    CHECK(line.find("nan") == std::string::npos);
    CHECK(line.find("inf") == std::string::npos);
    ++count;
  }
  CHECK(count == trainer.history().size());

  for (const StepMetrics& s : trainer.history()) {
    CHECK(std::isfinite(s.focal));
    CHECK(std::isfinite(s.dom));
    CHECK(std::isfinite(s.skd));
    CHECK(std::isfinite(s.offset));
    CHECK(s.loss_fc == doctest::Approx(s.focal - s.dom + cfg.alpha * s.skd +
                                       s.mu * cfg.beta * s.offset));
    CHECK(s.loss_d == s.dom);
  }
}

TEST_CASE("curriculum subset grows with the schedule") {
  const auto& fx = fixture();
  test::ScratchDir out("trainer-subset");
  TrainConfig cfg = fx.config(out / "run");
  cfg.epochs = 4;
  const DomainManifest m = load_train_manifests(cfg);
  Trainer trainer(cfg, m);

  const auto at0 = trainer.select_active(0);
  const auto at4 = trainer.select_active(4);
  CHECK(at0.size() == 24);  // ceil(0.5 * 48)
  CHECK(at4.size() > at0.size());
  CHECK(at4.size() <= 48);

  // Disabled curriculum trains on everything.
  TrainConfig flat = fx.config(out / "run2");
  flat.curriculum = false;
  Trainer all(flat, m);
  CHECK(all.select_active(0).size() == 48);
}

TEST_CASE("training moves the discriminator away from its probe optimum") {
  // With a frozen feature extractor the discriminator separates the toy
  // domains; adversarial training then pulls its accuracy back down.
  const auto& fx = fixture();
  test::ScratchDir out("trainer-adv");
  TrainConfig cfg = fx.config(out / "run");
  apply_ablation(cfg, "adversarial-only");
  cfg.epochs = 6;
  const DomainManifest m = load_train_manifests(cfg);

  Trainer trainer(cfg, m);
  trainer.fit();

  const ImageStore store(m.base_dir());
  std::vector<const SampleRecord*> all;
  for (const auto& r : m.records()) all.push_back(&r);
  const double after = discriminator_accuracy(trainer.model(), store, all);
  // Not a sharp bound; adversarial pressure keeps D near chance.
  CHECK(after < 0.95);
  CHECK(after >= 0.0);
}

TEST_CASE("resume reproduces the uninterrupted trajectory exactly") {
  // The schedules are functions of the total epoch count, so a valid
  // resume keeps the same config and picks up from a mid-run checkpoint.
  const auto& fx = fixture();
  test::ScratchDir straight_dir("trainer-straight");
  test::ScratchDir resumed_dir("trainer-resumed");

  TrainConfig cfg = fx.config(straight_dir / "run");
  cfg.epochs = 4;
  const DomainManifest m = load_train_manifests(cfg);

  Trainer straight(cfg, m);
  straight.fit();

  TrainConfig again = fx.config(resumed_dir / "run");
  again.epochs = 4;
  again.resume = straight_dir / "run" / "checkpoint-2.sdck";
  Trainer resumed(again, m);
  resumed.fit();
  CHECK(resumed.state().epoch == 4);

  // The resumed log is byte-identical to the straight run's last epochs.
  const std::string straight_log = slurp(straight_dir / "run" / "metrics.jsonl");
  const std::string resumed_log = slurp(resumed_dir / "run" / "metrics.jsonl");
  CHECK(!resumed_log.empty());
  CHECK(resumed_log.size() < straight_log.size());
  CHECK(straight_log.substr(straight_log.size() - resumed_log.size()) ==
        resumed_log);

  // Final weights agree exactly.
  const auto ps = straight.model().parameters();
  const auto pr = resumed.model().parameters();
  REQUIRE(ps.size() == pr.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(ps[i]->value == pr[i]->value);
    CHECK(ps[i]->momentum == pr[i]->momentum);
  }
}

TEST_CASE("resume rejects a checkpoint from another seed") {
  const auto& fx = fixture();
  test::ScratchDir out("trainer-wrong-seed");
  TrainConfig cfg = fx.config(out / "run");
  cfg.epochs = 1;
  const DomainManifest m = load_train_manifests(cfg);
  Trainer t(cfg, m);
  t.fit();

  TrainConfig other = fx.config(out / "run2");
  other.seed = 6;
  other.resume = out / "run" / "checkpoint-final.sdck";
  CHECK_THROWS_AS(Trainer(other, m), Error);
}

TEST_CASE("max_steps caps the run for short diagnostics") {
  const auto& fx = fixture();
  test::ScratchDir out("trainer-capped");
  TrainConfig cfg = fx.config(out / "run");
  cfg.max_steps = 3;
  const DomainManifest m = load_train_manifests(cfg);
  Trainer t(cfg, m);
  t.fit();
  CHECK(t.history().size() == 3);
}

TEST_CASE("two trainers with one seed produce identical histories") {
  const auto& fx = fixture();
  test::ScratchDir out("trainer-det");
  TrainConfig a = fx.config(out / "a");
  TrainConfig b = fx.config(out / "b");
  const DomainManifest m = load_train_manifests(a);

  Trainer ta(a, m);
  ta.fit();
  Trainer tb(b, m);
  tb.fit();

  CHECK(slurp(out / "a" / "metrics.jsonl") == slurp(out / "b" / "metrics.jsonl"));

  TrainConfig c = fx.config(out / "c");
  c.seed = 6;
  Trainer tc(c, m);
  tc.fit();
  CHECK(slurp(out / "a" / "metrics.jsonl") != slurp(out / "c" / "metrics.jsonl"));
}

TEST_CASE("evaluate reports consistent, recomposable accuracies") {
  const auto& fx = fixture();
  test::ScratchDir out("eval-run");
  TrainConfig cfg = fx.config(out / "run");
  cfg.epochs = 1;
  const DomainManifest m = load_train_manifests(cfg);
  Trainer t(cfg, m);
  t.fit();

  const EvalResult r = evaluate(t.model(), m);
  CHECK(r.n_eval == 32);
  CHECK(r.overall_acc >= 0.0);
  CHECK(r.overall_acc <= 1.0);
  REQUIRE(r.confusion.size() == 5);

  // Confusion entries sum to n_eval; diagonal over rows recomposes overall.
  long total = 0, diag = 0;
  std::vector<long> row_totals(5, 0);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      total += r.confusion[i][j];
      row_totals[i] += r.confusion[i][j];
    }
    diag += r.confusion[i][i];
  }
  CHECK(total == 32);
  CHECK(static_cast<double>(diag) / 32.0 ==
        doctest::Approx(r.overall_acc).epsilon(1e-9));

  // Per-class accuracies recompose micro accuracy through their counts.
  double weighted = 0.0;
  double macro = 0.0;
  int present = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    if (row_totals[i] == 0) continue;
    const std::string& name = r.label_space[i];
    REQUIRE(r.per_class.count(name) == 1);
    weighted += r.per_class.at(name) * static_cast<double>(row_totals[i]);
    macro += r.per_class.at(name);
    ++present;
  }
  CHECK(weighted / 32.0 == doctest::Approx(r.overall_acc).epsilon(1e-9));
  CHECK(macro / present == doctest::Approx(r.macro_acc).epsilon(1e-9));

  // Per-weather accuracies recompose the same way.
  double weather_correct = 0.0;
  std::map<std::string, int> weather_counts;
  for (const auto& rec : m.domain_records(Domain::target))
    ++weather_counts[std::string(weather_tag(*rec->weather))];
  for (const auto& [tag, acc] : r.per_weather) {
    REQUIRE(weather_counts.count(tag) == 1);
    weather_correct += acc * weather_counts[tag];
  }
  CHECK(weather_correct / 32.0 == doctest::Approx(r.overall_acc).epsilon(1e-9));
}

TEST_CASE("evaluation is invariant to record order") {
  const auto& fx = fixture();
  test::ScratchDir out("eval-order");
  TrainConfig cfg = fx.config(out / "run");
  cfg.epochs = 1;
  const DomainManifest m = load_train_manifests(cfg);
  Trainer t(cfg, m);
  t.fit();

  const EvalResult a = evaluate(t.model(), m);

  // Reload the target manifest with records reversed.
  auto records = m.records();
  std::reverse(records.begin(), records.end());
  std::vector<SampleRecord> with_labels;
  for (auto r : records) {
    if (r.domain == Domain::target) r.class_label = m.evaluation_label(r.id);
    with_labels.push_back(r);
  }
  const auto reversed = DomainManifest::from_records(
      m.label_space(), with_labels, m.base_dir());
  const EvalResult b = evaluate(t.model(), reversed);

  CHECK(a.overall_acc == b.overall_acc);
  CHECK(a.macro_acc == b.macro_acc);
  CHECK(a.per_class == b.per_class);
  CHECK(a.per_weather == b.per_weather);
  CHECK(a.confusion == b.confusion);
}

TEST_CASE("eval results round-trip through disk") {
  test::ScratchDir dir("eval-rt");
  EvalResult r;
  r.overall_acc = 0.625;
  r.macro_acc = 0.5;
  r.label_space = {"a", "b"};
  r.per_class = {{"a", 0.75}, {"b", 0.25}};
  r.per_weather = {{"sunny", 0.625}};
  r.confusion = {{3, 1}, {2, 2}};
  r.n_eval = 8;
  const auto path = dir / "eval.json";
  write_eval_result(path, r);
  const EvalResult back = read_eval_result(path);
  CHECK(back.overall_acc == r.overall_acc);
  CHECK(back.macro_acc == r.macro_acc);
  CHECK(back.label_space == r.label_space);
  CHECK(back.per_class == r.per_class);
  CHECK(back.per_weather == r.per_weather);
  CHECK(back.confusion == r.confusion);
  CHECK(back.n_eval == 8);
}

TEST_CASE("compare_runs lines up metrics across runs") {
  EvalResult a;
  a.overall_acc = 0.5;
  a.macro_acc = 0.45;
  a.label_space = {"x", "y"};
  a.per_class = {{"x", 0.6}, {"y", 0.3}};
  a.per_weather = {{"sunny", 0.5}};
  a.n_eval = 10;
  EvalResult b = a;
  b.overall_acc = 0.7;
  b.per_class["x"] = 0.8;

  const RunComparison cmp = compare_runs({{"base", a}, {"full", b}});
  CHECK(cmp.run_names == std::vector<std::string>{"base", "full"});

  bool saw_overall = false;
  for (const auto& row : cmp.rows) {
    if (row.section == "overall") {
      saw_overall = true;
      CHECK(row.values == std::vector<double>{0.5, 0.7});
      CHECK(row.delta == doctest::Approx(0.2));
    }
  }
  CHECK(saw_overall);

  const std::string text = comparison_text(cmp);
  CHECK(text.find("base") != std::string::npos);
  CHECK(text.find("overall") != std::string::npos);
  const std::string csv = comparison_csv(cmp);
  CHECK(csv.find("metric,base,full,delta") == 0);

  EvalResult other = a;
  other.label_space = {"x", "z"};
  CHECK_THROWS_AS(compare_runs({{"a", a}, {"o", other}}), Error);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  Eigen::RowVectorXd row(4);
  row << 0.2, 0.4, 0.4, 0.1;
  CHECK(argmax_row(row) == 1);
}
