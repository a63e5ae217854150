// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/model.hpp"

#include <algorithm>

#include "seadapt/common.hpp"

namespace seadapt {

void BackboneConfig::validate() const {
  require(image_height > 0 && image_width > 0 && channels > 0,
          "backbone: bad image dimensions ", image_height, "x", image_width,
          "x", channels);
  require(patch_size > 0 && image_height % patch_size == 0 &&
              image_width % patch_size == 0,
          "backbone: image ", image_height, "x", image_width,
          " not divisible by patch size ", patch_size);
  require(dim > 0 && heads > 0 && dim % heads == 0, "backbone: dim ", dim,
          " not divisible by ", heads, " heads");
  require(blocks > 0, "backbone: needs at least one block");
  require(mlp_hidden > 0, "backbone: bad mlp hidden size ", mlp_hidden);
}

void TokenSequence::validate() const {
  require(batch > 0 && tokens > 0, "token sequence: bad batch/token counts ",
          batch, "/", tokens);
  require(data.rows() == static_cast<long>(batch) * tokens,
          "token sequence: data has ", data.rows(), " rows, expected batch ",
          batch, " * tokens ", tokens);
  require(data.cols() > 0, "token sequence: zero channels");
}

Backbone::Backbone(const BackboneConfig& config, const std::string& name)
    : config_(config),
      patch_embed_(name + ".patch",
                   config.patch_size * config.patch_size * config.channels,
                   config.dim),
      cls_(name + ".cls", 1, config.dim),
      pos_(name + ".pos", config.patches() + 1, config.dim),
      final_ln_(name + ".ln", config.dim) {
  config_.validate();
  blocks_.reserve(static_cast<std::size_t>(config.blocks));
  for (int i = 0; i < config.blocks; ++i)
    blocks_.emplace_back(concat(name, ".block", i), config.dim, config.heads,
                         config.mlp_hidden);
}

void Backbone::init(Rng& rng, double embed_stddev) {
  patch_embed_.init(rng);
  for (int i = 0; i < cls_.value.cols(); ++i)
    cls_.value(0, i) = rng.normal(0.0, embed_stddev);
  for (int i = 0; i < pos_.value.rows(); ++i)
    for (int j = 0; j < pos_.value.cols(); ++j)
      pos_.value(i, j) = rng.normal(0.0, embed_stddev);
  for (auto& b : blocks_) b.init(rng);
}

Var Backbone::embed(Graph& g, Var images) {
  const long batch = g.value(images).rows();
  require(batch > 0, "backbone: empty image batch");
  const Var patches = g.patchify(images, config_.image_dims(),
                                 config_.patch_size);
  const Var embedded = patch_embed_(g, patches);
  return g.add_cls_pos(embedded, g.param(cls_), g.param(pos_),
                       static_cast<int>(batch), config_.patches());
}

Backbone::Forward Backbone::forward_tokens(Graph& g, Var tokens, int batch,
                                           int from_block,
                                           const std::vector<int>& record_blocks,
                                           const BlockHook* hook) {
  require(from_block >= 0 && from_block < config_.blocks,
          "backbone: block index ", from_block, " outside [0,",
          config_.blocks, ")");
  Forward fwd;
  const int t = config_.tokens();
  for (int l = from_block; l < config_.blocks; ++l) {
    if (std::find(record_blocks.begin(), record_blocks.end(), l) !=
        record_blocks.end())
      fwd.block_inputs.emplace(l, tokens);
    if (hook) tokens = (*hook)(g, tokens, l);
    tokens = blocks_[static_cast<std::size_t>(l)](g, tokens, batch, t);
  }
  tokens = final_ln_(g, tokens);
  fwd.features = g.take_every(tokens, t, 0, batch);
  return fwd;
}

Backbone::Forward Backbone::forward(Graph& g, Var images,
                                    const std::vector<int>& record_blocks,
                                    const BlockHook* hook) {
  const int batch = static_cast<int>(g.value(images).rows());
  return forward_tokens(g, embed(g, images), batch, 0, record_blocks, hook);
}

Var Backbone::forward_from(Graph& g, Var tokens, int batch, int from_block) {
  return forward_tokens(g, tokens, batch, from_block, {}, nullptr).features;
}

void Backbone::collect(std::vector<Parameter*>& out) {
  patch_embed_.collect(out);
  out.push_back(&cls_);
  out.push_back(&pos_);
  for (auto& b : blocks_) b.collect(out);
  final_ln_.collect(out);
}

EnhancementHead::EnhancementHead(const std::string& name, int in_dim,
                                 int embed_dim)
    : fc1_(name + ".fc1", in_dim, in_dim), fc2_(name + ".fc2", in_dim,
                                                embed_dim) {}

void EnhancementHead::init(Rng& rng) {
  fc1_.init(rng);
  fc2_.init(rng);
}

Var EnhancementHead::operator()(Graph& g, Var features) {
  return fc2_(g, g.gelu(fc1_(g, features)));
}

void EnhancementHead::collect(std::vector<Parameter*>& out) {
  fc1_.collect(out);
  fc2_.collect(out);
}

ClassifierHead::ClassifierHead(const std::string& name, int embed_dim,
                               int classes, double dropout_rate)
    : fc_(name + ".fc", embed_dim, classes), dropout_rate_(dropout_rate) {
  require(classes >= 2, "classifier: needs at least two classes, got ",
          classes);
  require(dropout_rate >= 0.0 && dropout_rate < 1.0,
          "classifier: dropout rate must lie in [0,1), got ", dropout_rate);
}

void ClassifierHead::init(Rng& rng) { fc_.init(rng); }

Var ClassifierHead::probs(Graph& g, Var enhanced, bool training, Rng& rng) {
  const Var dropped = g.dropout(enhanced, dropout_rate_, training, rng);
  return g.softmax_rows(fc_(g, dropped));
}

void ClassifierHead::collect(std::vector<Parameter*>& out) {
  fc_.collect(out);
}

DomainDiscriminator::DomainDiscriminator(const std::string& name, int in_dim,
                                         int hidden)
    : fc1_(name + ".fc1", in_dim, hidden),
      fc2_(name + ".fc2", hidden, hidden),
      fc3_(name + ".fc3", hidden, 2) {}

void DomainDiscriminator::init(Rng& rng) {
  fc1_.init(rng);
  fc2_.init(rng);
  fc3_.init(rng);
}

Var DomainDiscriminator::probs(Graph& g, Var features,
                               std::optional<double> reversal) {
  Var x = features;
  if (reversal) x = g.grad_reverse(x, *reversal);
  x = g.relu(fc1_(g, x));
  x = g.relu(fc2_(g, x));
  return g.softmax_rows(fc3_(g, x));
}

void DomainDiscriminator::collect(std::vector<Parameter*>& out) {
  fc1_.collect(out);
  fc2_.collect(out);
  fc3_.collect(out);
}

void ModelConfig::validate() const {
  backbone.validate();
  require(embed_dim > 0, "model: embed_dim must be positive");
  require(classes >= 2, "model: needs at least two classes");
  require(dropout >= 0.0 && dropout < 1.0, "model: dropout must lie in [0,1)");
  require(disc_hidden > 0, "model: disc_hidden must be positive");
}

Model::Model(const ModelConfig& config)
    : f(config.backbone, "f"),
      g("g", config.backbone.dim, config.embed_dim),
      c("c", config.embed_dim, config.classes, config.dropout),
      d("d", config.backbone.dim, config.disc_hidden),
      config_(config) {
  config_.validate();
}

void Model::init(Rng& rng) {
  f.init(rng);
  g.init(rng);
  c.init(rng);
  d.init(rng);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = task_parameters();
  d.collect(out);
  return out;
}

std::vector<Parameter*> Model::task_parameters() {
  std::vector<Parameter*> out;
  f.collect(out);
  g.collect(out);
  c.collect(out);
  return out;
}

std::vector<Parameter*> Model::discriminator_parameters() {
  std::vector<Parameter*> out;
  d.collect(out);
  return out;
}

}  // namespace seadapt
