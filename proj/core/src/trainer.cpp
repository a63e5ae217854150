// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "seadapt/common.hpp"
#include "seadapt/curriculum.hpp"
#include "seadapt/eval.hpp"
#include "seadapt/losses.hpp"
#include "seadapt/perturbation.hpp"

namespace seadapt {
namespace {

std::string join_ids(const MixedBatch& batch) {
  std::string out;
  const auto append = [&out](const std::vector<SampleRecord>& items) {
    for (const auto& r : items) {
      if (!out.empty()) out += ",";
      out += r.id;
    }
  };
  append(batch.source_items);
  append(batch.target_items);
  return out;
}

}  // namespace

DomainManifest load_train_manifests(const TrainConfig& cfg) {
  for (const auto* p : {&cfg.source_manifest, &cfg.target_manifest}) {
    if (!std::filesystem::exists(*p))
      fail_config("manifest not found: ", p->string());
  }
  std::error_code ec;
  const bool same =
      std::filesystem::equivalent(cfg.source_manifest, cfg.target_manifest, ec);
  if (!ec && same) return DomainManifest::load(cfg.source_manifest);
  const DomainManifest a = DomainManifest::load(cfg.source_manifest);
  const DomainManifest b = DomainManifest::load(cfg.target_manifest);
  return merge_manifests(a, b);
}

Trainer::Trainer(TrainConfig config, DomainManifest manifest,
                 std::shared_ptr<EmbeddingProvider> provider)
    : config_(std::move(config)),
      manifest_(std::move(manifest)),
      store_(manifest_.base_dir()) {
  config_.validate();
  require(manifest_.n_source() > 0, "training manifest has no source records");
  require(manifest_.n_target() > 0, "training manifest has no target records");

  const ModelConfig mc = config_.model_config(manifest_.class_count());

  provider_ = provider ? std::move(provider)
                       : std::shared_ptr<EmbeddingProvider>(make_provider(
                             config_.provider, config_.embed_dim,
                             config_.provider_seed));
  require(provider_->embed_dim() == config_.embed_dim,
          "provider produces ", provider_->embed_dim(),
          "-dimensional embeddings but embed_dim is ", config_.embed_dim);
  if (!config_.embed_cache.empty()) {
    cache_ = std::make_unique<EmbeddingCache>(config_.embed_cache, *provider_);
  }

  model_ = std::make_unique<Model>(mc);
  if (!config_.resume.empty()) {
    const TrainerState st = load_checkpoint(config_.resume, *model_);
    require(st.seed == config_.seed, "checkpoint ", config_.resume.string(),
            " was written under seed ", st.seed, ", not ", config_.seed);
    require(st.epoch <= config_.epochs, "checkpoint ",
            config_.resume.string(), " already covers ", st.epoch,
            " epochs, more than the configured ", config_.epochs);
    start_epoch_ = st.epoch;
    iteration_ = st.iteration;
  } else {
    Rng init_rng(derive_seed(config_.seed, "init"));
    model_->init(init_rng);
  }
  optimizer_ = std::make_unique<nn::SgdOptimizer>(model_->parameters(), config_.lr,
                                              config_.momentum);

  source_records_ = manifest_.domain_records(Domain::source);

  if (config_.skd) {
    const std::vector<WeatherCondition> weathers(
        all_weather_conditions().begin(), all_weather_conditions().end());
    text_table_ =
        text_embedding_table(*provider_, manifest_.label_space(), weathers,
                             config_.prompt_template, cache_.get());
    for (const SampleRecord* r : source_records_) image_embedding_for(*r);
    if (cache_) cache_->flush();
  }
}

TrainerState Trainer::state() const {
  TrainerState st;
  st.epoch = start_epoch_;
  st.iteration = iteration_;
  st.seed = config_.seed;
  return st;
}

const Eigen::VectorXd& Trainer::image_embedding_for(const SampleRecord& rec) {
  const auto it = image_embeddings_.find(rec.id);
  if (it != image_embeddings_.end()) return it->second;

  const std::string key = EmbeddingCache::image_key(rec.id);
  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      return image_embeddings_.emplace(rec.id, std::move(*hit)).first->second;
    }
  }
  const Eigen::RowVectorXd pixels = store_.image(rec.image_ref);
  const ImageDims dims = store_.dims(rec.image_ref);
  EmbeddingVector v = image_embedding(*provider_, pixels, dims);
  if (cache_) cache_->store(key, v.values);
  return image_embeddings_.emplace(rec.id, std::move(v.values)).first->second;
}

Eigen::VectorXd Trainer::text_embedding_for(const SampleRecord& rec) const {
  require(rec.class_label.has_value() && rec.weather.has_value(),
          "distillation needs class and weather on record '", rec.id, "'");
  const auto key = std::make_pair(
      manifest_.label_space()[static_cast<std::size_t>(*rec.class_label)],
      *rec.weather);
  const auto it = text_table_.find(key);
  require(it != text_table_.end(), "no text embedding for class '", key.first,
          "' under ", weather_tag(key.second));
  return it->second;
}

std::vector<double> Trainer::source_pool_ce() {
  std::vector<int> labels;
  labels.reserve(source_records_.size());
  for (const SampleRecord* r : source_records_) labels.push_back(*r->class_label);
  const ad::Mat probs = predict_probs(*model_, store_, source_records_, 64);
  const Eigen::VectorXd ce = per_sample_cross_entropy(probs, labels);
  return {ce.data(), ce.data() + ce.size()};
}

std::vector<std::string> Trainer::select_active(int t) {
  std::vector<std::string> all_ids;
  all_ids.reserve(source_records_.size());
  for (const SampleRecord* r : source_records_) all_ids.push_back(r->id);
  if (!config_.curriculum) return all_ids;

  std::vector<double> priors;
  priors.reserve(source_records_.size());
  for (const SampleRecord* r : source_records_) {
    if (r->prior_score) {
      priors.push_back(*r->prior_score);
    } else if (r->prior_quality) {
      priors.push_back(prior_score(*r->prior_quality, *r->weather));
    } else {
      fail("curriculum needs prior_quality or prior_score on source record '",
           r->id, "'");
    }
  }

  const double phi = phi_schedule(t, config_.epochs);
  // At phi = 0 the dynamic term carries no weight, so the pool inference
  // pass is skipped and a flat placeholder is normalized in its place.
  const std::vector<double> pool_ce =
      phi == 0.0 ? std::vector<double>(source_records_.size(), 0.0)
                 : source_pool_ce();
  const auto scores = score_pool(all_ids, priors, pool_ce, phi);
  return select_subset(scores, t, config_.schedule());
}

StepMetrics Trainer::train_step(const MixedBatch& batch, int t, int s,
                                int active, EpochStreams& streams) {
  const int n_src = static_cast<int>(batch.source_items.size());
  const int n_tgt = static_cast<int>(batch.target_items.size());
  const int n = n_src + n_tgt;
  require(n_src >= 1 && n_tgt >= 1, "mixed batch lost a domain side");

  std::vector<std::string> refs;
  refs.reserve(n);
  std::vector<int> labels;
  labels.reserve(n_src);
  std::vector<int> domain_of(n, 0);
  for (const auto& r : batch.source_items) {
    refs.push_back(r.image_ref);
    labels.push_back(*r.class_label);
  }
  for (int j = 0; j < n_tgt; ++j) {
    refs.push_back(batch.target_items[j].image_ref);
    domain_of[n_src + j] = 1;
  }
  const ad::Mat images = store_.batch(refs);

  const double total_epochs = config_.epochs;
  const double tau = config_.curriculum ? tau_schedule(t, total_epochs) : 0.0;
  const double lambda =
      config_.curriculum ? lambda_schedule(t, config_.schedule()) : 1.0;
  const double mu = adaptive_scalar(iteration_, config_.adaptive_period);
  const ModulatedScalars mod =
      modulated_scalars(mu, config_.gamma, config_.beta);

  const bool offsets = config_.offsets_enabled();
  const bool token_mode = config_.offset_mode == "token";
  int omega = 0;
  int block = -1;
  std::vector<int> pairing;
  if (offsets) {
    omega = draw_omega(streams.omega);
    if (token_mode) block = select_block(config_.perturbation(), streams.perturb);
    pairing = pair_within_batch(n, streams.perturb);
  }

  Graph g(true);
  const Var x = g.input(images);

  const std::vector<int> record_blocks =
      token_mode && offsets ? std::vector<int>{block} : std::vector<int>{};
  auto fwd = model_->f.forward(g, x, record_blocks);
  const Var enhanced = model_->g(g, fwd.features);
  const Var probs = model_->c.probs(g, enhanced, true, streams.dropout);

  std::vector<int> src_rows(n_src);
  std::iota(src_rows.begin(), src_rows.end(), 0);
  const Var src_probs = g.select_rows(probs, src_rows);
  const Var focal_v = losses::focal_loss(g, src_probs, labels, tau);

  const Var dprobs = model_->d.probs(g, fwd.features, 1.0);
  const Var dom_v = losses::domain_adversarial(g, dprobs, domain_of);

  Var skd_v{};
  if (config_.skd) {
    const int d_e = config_.embed_dim;
    ad::Mat text(n_src, d_e), image(n_src, d_e);
    for (int i = 0; i < n_src; ++i) {
      const SampleRecord& r = batch.source_items[static_cast<std::size_t>(i)];
      text.row(i) = text_embedding_for(r).transpose();
      image.row(i) = image_embedding_for(r).transpose();
    }
    const Var enh_src = g.select_rows(enhanced, src_rows);
    skd_v = losses::skd(g, enh_src, text, image);
  }

  Var offset_v{};
  if (offsets) {
    Var perturbed_probs{};
    if (token_mode) {
      const Var s_i = fwd.block_inputs.at(block);
      const Var s_tilde = token_offset(
          g, s_i, pairing, model_->config().backbone.tokens(), mod.gamma_mu);
      const Var feat_p = model_->f.forward_from(g, s_tilde, n, block);
      const Var enh_p = model_->g(g, feat_p);
      perturbed_probs = model_->c.probs(g, enh_p, true, streams.dropout);
    } else {
      const Var x_tilde = token_offset(g, x, pairing, 1, mod.gamma_mu);
      const Var feat_p = model_->f.forward(g, x_tilde).features;
      const Var enh_p = model_->g(g, feat_p);
      perturbed_probs = model_->c.probs(g, enh_p, true, streams.dropout);
    }
    offset_v = losses::offset_refinement(g, probs, perturbed_probs,
                                         config_.kappa, omega);
  }

  const double focal_val = g.scalar(focal_v);
  const double dom_val = g.scalar(dom_v);
  const double skd_val = config_.skd ? g.scalar(skd_v) : 0.0;
  const double offset_val = offsets ? g.scalar(offset_v) : 0.0;

  ObjectiveParts parts;
  try {
    parts = total_objective(focal_val, dom_val, skd_val, offset_val,
                            config_.skd ? config_.alpha : 0.0,
                            offsets ? config_.beta : 0.0, mu);
  } catch (const Error& e) {
    fail(e.what(), " at epoch ", t, " step ", s,
         "; batch ids: ", join_ids(batch));
  }

  Var total = focal_v;
  if (config_.skd && config_.alpha != 0.0)
    total = g.add(total, g.scale(skd_v, config_.alpha));
  if (offsets && mod.beta_mu != 0.0)
    total = g.add(total, g.scale(offset_v, mod.beta_mu));
  total = g.add(total, dom_v);

  g.backward(total);
  optimizer_->step();

  StepMetrics m;
  m.epoch = t;
  m.step = s;
  m.iteration = iteration_;
  m.focal = focal_val;
  m.dom = dom_val;
  m.skd = skd_val;
  m.offset = offset_val;
  m.mu = mu;
  m.tau = tau;
  m.lambda = lambda;
  m.active = active;
  m.loss_fc = parts.loss_fc;
  m.loss_d = parts.loss_d;
  return m;
}

void Trainer::run_epoch(int t, std::ostream& metrics_out, bool& stop) {
  const auto active_ids = select_active(t);
  const std::set<std::string> active_set(active_ids.begin(), active_ids.end());
  MixedBatchSampler sampler(
      manifest_, active_set, config_.batch_size,
      derive_seed(config_.seed, "sampler", static_cast<std::uint64_t>(t)));
  EpochStreams streams{
      Rng(derive_seed(config_.seed, "dropout", static_cast<std::uint64_t>(t))),
      Rng(derive_seed(config_.seed, "perturb", static_cast<std::uint64_t>(t))),
      Rng(derive_seed(config_.seed, "omega", static_cast<std::uint64_t>(t)))};

  const int steps = sampler.batches_per_epoch();
  for (int s = 0; s < steps; ++s) {
    if (config_.max_steps > 0 && iteration_ >= config_.max_steps) {
      stop = true;
      return;
    }
    const MixedBatch batch = sampler.next();
    const StepMetrics m =
        train_step(batch, t, s, static_cast<int>(active_ids.size()), streams);

    nlohmann::ordered_json line;
    line["epoch"] = m.epoch;
    line["step"] = m.step;
    line["iteration"] = m.iteration;
    line["focal"] = m.focal;
    line["dom"] = m.dom;
    line["skd"] = m.skd;
    line["offset"] = m.offset;
    line["mu"] = m.mu;
    line["tau"] = m.tau;
    line["lambda"] = m.lambda;
    line["active"] = m.active;
    line["loss_fc"] = m.loss_fc;
    line["loss_d"] = m.loss_d;
    metrics_out << line.dump() << "\n";

    history_.push_back(m);
    ++iteration_;
  }
}

void Trainer::save_epoch_checkpoint(int completed_epochs) {
  TrainerState st;
  st.epoch = completed_epochs;
  st.iteration = iteration_;
  st.seed = config_.seed;
  const auto path =
      config_.out_dir / concat("checkpoint-", completed_epochs, ".sdck");
  save_checkpoint(path, *model_, st);
}

void Trainer::fit() {
  std::filesystem::create_directories(config_.out_dir);
  const bool resuming = !config_.resume.empty();
  std::ofstream metrics(config_.out_dir / "metrics.jsonl",
                        resuming ? std::ios::app : std::ios::trunc);
  require(metrics.good(), "cannot open metrics log under ",
          config_.out_dir.string());

  int completed = start_epoch_;
  bool stop = false;
  for (int t = start_epoch_; t < config_.epochs && !stop; ++t) {
    run_epoch(t, metrics, stop);
    if (stop) break;
    completed = t + 1;
    if (completed % config_.checkpoint_every == 0 || completed == config_.epochs)
      save_epoch_checkpoint(completed);
    metrics.flush();
  }

  TrainerState st;
  st.epoch = completed;
  st.iteration = iteration_;
  st.seed = config_.seed;
  save_checkpoint(config_.out_dir / "checkpoint-final.sdck", *model_, st);
  start_epoch_ = completed;

  metrics.flush();
  require(metrics.good(), "failed writing metrics log under ",
          config_.out_dir.string());
  if (cache_) cache_->flush();
}

}  // namespace seadapt
