// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seadapt/nn.hpp"

namespace seadapt {

using ad::Graph;
using ad::Mat;
using ad::Parameter;
using ad::Var;

struct BackboneConfig {
  int image_height = 224;
  int image_width = 224;
  int channels = 3;
  int patch_size = 16;
  int dim = 768;
  int heads = 12;
  int blocks = 12;
  int mlp_hidden = 3072;

  int patches() const {
    return (image_height / patch_size) * (image_width / patch_size);
  }
  // Patch tokens plus the class token.
  int tokens() const { return patches() + 1; }
  ImageDims image_dims() const { return {image_height, image_width, channels}; }

  void validate() const;
};

// The input token sequence of one backbone block, as a value snapshot.
// data rows are sample-major: row (b * tokens + t) is token t of sample b.
struct TokenSequence {
  Mat data;  // (batch*tokens) x channels
  int batch = 0;
  int tokens = 0;
  int block_index = 0;

  int channels() const { return static_cast<int>(data.cols()); }
  void validate() const;
};

// Read/write hook applied to a block's input tokens. Returning the given
// Var unchanged makes the hook a pure reader.
using BlockHook = std::function<Var(Graph&, Var tokens, int block_index)>;

// Patch-token transformer encoder (the feature extractor F). Exposes the
// input token sequence of every block for recording and substitution.
class Backbone {
 public:
  explicit Backbone(const BackboneConfig& config, const std::string& name = "f");

  // Linear weights draw fan-aware normals; `embed_stddev` sets the scale
  // of the class-token and positional tables.
  void init(Rng& rng, double embed_stddev = 0.02);

  struct Forward {
    // Class-token features after the final layer norm, batch x dim.
    Var features;
    // Block input tokens captured for the indices asked for.
    std::map<int, Var> block_inputs;
  };

  // Full forward pass from images (batch x pixels). `record_blocks` lists
  // block indices whose input tokens should be captured; `hook`, when
  // given, rewrites every block's input tokens.
  Forward forward(Graph& g, Var images,
                  const std::vector<int>& record_blocks = {},
                  const BlockHook* hook = nullptr);

  // Resumes the encoder at `from_block` with substituted input tokens,
  // sharing everything below with the pass that produced them.
  Var forward_from(Graph& g, Var tokens, int batch, int from_block);

  // Patch embedding plus class token and positional table: the input of
  // block 0.
  Var embed(Graph& g, Var images);

  const BackboneConfig& config() const { return config_; }

  void collect(std::vector<Parameter*>& out);

 private:
  Forward forward_tokens(Graph& g, Var tokens, int batch, int from_block,
                         const std::vector<int>& record_blocks,
                         const BlockHook* hook);

  BackboneConfig config_;
  nn::Linear patch_embed_;
  Parameter cls_;
  Parameter pos_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::LayerNorm final_ln_;
};

// Feature enhancement head G: two-layer MLP from backbone features into
// the shared embedding space of dimension d_e.
class EnhancementHead {
 public:
  EnhancementHead(const std::string& name, int in_dim, int embed_dim);

  void init(Rng& rng);

  Var operator()(Graph& g, Var features);

  void collect(std::vector<Parameter*>& out);

 private:
  nn::Linear fc1_;
  nn::Linear fc2_;
};

// Classifier C: dropout, affine map, softmax. Consumes enhanced features.
class ClassifierHead {
 public:
  ClassifierHead(const std::string& name, int embed_dim, int classes,
                 double dropout_rate);

  void init(Rng& rng);

  // Row-stochastic class probabilities. The dropout mask is drawn from
  // `rng` when training; inference ignores it.
  Var probs(Graph& g, Var enhanced, bool training, Rng& rng);

  double dropout_rate() const { return dropout_rate_; }

  void collect(std::vector<Parameter*>& out);

 private:
  nn::Linear fc_;
  double dropout_rate_;
};

// Domain discriminator D: three-layer MLP over pre-enhancement backbone
// features, reached through a gradient-reversal stage.
class DomainDiscriminator {
 public:
  DomainDiscriminator(const std::string& name, int in_dim, int hidden);

  void init(Rng& rng);

  // Domain probabilities, batch x 2 (column 0 = source). `reversal`, when
  // set, scales the gradient flowing back into `features` by -reversal;
  // when empty the features are consumed without reversal (probe mode).
  Var probs(Graph& g, Var features, std::optional<double> reversal);

  void collect(std::vector<Parameter*>& out);

 private:
  nn::Linear fc1_;
  nn::Linear fc2_;
  nn::Linear fc3_;
};

struct ModelConfig {
  BackboneConfig backbone;
  int embed_dim = 512;  // d_e: enhancement output, matches the provider
  int classes = 15;
  double dropout = 0.1;
  int disc_hidden = 256;

  void validate() const;
};

// The full trainable bundle: F (backbone), G (enhancement), C (classifier),
// D (discriminator). The classifier consumes G's output; the discriminator
// consumes F's output directly.
class Model {
 public:
  explicit Model(const ModelConfig& config);

  void init(Rng& rng);

  std::vector<Parameter*> parameters();
  // Parameters of F, G, C only (the minimax's minimizing side).
  std::vector<Parameter*> task_parameters();
  std::vector<Parameter*> discriminator_parameters();

  const ModelConfig& config() const { return config_; }

  Backbone f;
  EnhancementHead g;
  ClassifierHead c;
  DomainDiscriminator d;

 private:
  ModelConfig config_;
};

}  // namespace seadapt
