// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "seadapt/graph.hpp"
#include "seadapt/rng.hpp"

namespace seadapt::nn {

using ad::Graph;
using ad::Mat;
using ad::Parameter;
using ad::Var;

// Affine map. Weight is in x out; bias is a broadcast row.
class Linear {
 public:
  Linear(std::string name, int in, int out);

  // Fan-aware draw: weights ~ N(0, 2 / (in + out)), bias zero. Keeps
  // activation scale roughly constant through stacked affine maps.
  void init(Rng& rng);

  Var operator()(Graph& g, Var x);

  void collect(std::vector<Parameter*>& out);

  int in_dim() const { return static_cast<int>(w.value.rows()); }
  int out_dim() const { return static_cast<int>(w.value.cols()); }

  Parameter w;
  Parameter b;
};

class LayerNorm {
 public:
  LayerNorm(std::string name, int dim);

  Var operator()(Graph& g, Var x);

  void collect(std::vector<Parameter*>& out);

  Parameter gain;
  Parameter bias;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention(std::string name, int dim, int heads);

  void init(Rng& rng);

  Var operator()(Graph& g, Var x, int batch, int tokens);

  void collect(std::vector<Parameter*>& out);

  int heads;
  Linear q, k, v, proj;
};

// Two-layer MLP with GELU.
class FeedForward {
 public:
  FeedForward(std::string name, int dim, int hidden);

  void init(Rng& rng);

  Var operator()(Graph& g, Var x);

  void collect(std::vector<Parameter*>& out);

  Linear fc1, fc2;
};

// Pre-norm transformer block: x + attn(ln1(x)), then x + ff(ln2(x)).
class TransformerBlock {
 public:
  TransformerBlock(std::string name, int dim, int heads, int hidden);

  void init(Rng& rng);

  Var operator()(Graph& g, Var x, int batch, int tokens);

  void collect(std::vector<Parameter*>& out);

  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  FeedForward ff;
};

// SGD with classical momentum:
//   v <- momentum * v + grad;  p <- p - lr * v.
// step() consumes and clears the accumulated gradients.
class SgdOptimizer {
 public:
  SgdOptimizer(std::vector<Parameter*> params, double learning_rate,
               double momentum);

  void step();
  void zero_grad();

  double learning_rate() const { return lr_; }
  double momentum() const { return momentum_; }

 private:
  std::vector<Parameter*> params_;
  double lr_;
  double momentum_;
};

}  // namespace seadapt::nn
