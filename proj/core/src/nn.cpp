// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/nn.hpp"

#include "seadapt/common.hpp"

namespace seadapt::nn {

Linear::Linear(std::string name, int in, int out)
    : w(name + ".w", in, out), b(name + ".b", 1, out) {
  require(in > 0 && out > 0, "linear ", name, ": bad dimensions ", in, "x",
          out);
}

void Linear::init(Rng& rng) {
  const double stddev =
      std::sqrt(2.0 / static_cast<double>(w.value.rows() + w.value.cols()));
  for (int i = 0; i < w.value.rows(); ++i)
    for (int j = 0; j < w.value.cols(); ++j)
      w.value(i, j) = rng.normal(0.0, stddev);
  b.value.setZero();
}

Var Linear::operator()(Graph& g, Var x) {
  return g.linear(x, g.param(w), g.param(b));
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

LayerNorm::LayerNorm(std::string name, int dim)
    : gain(name + ".gain", 1, dim), bias(name + ".bias", 1, dim) {
  gain.value.setOnes();
}

Var LayerNorm::operator()(Graph& g, Var x) {
  return g.layer_norm(x, g.param(gain), g.param(bias));
}

void LayerNorm::collect(std::vector<Parameter*>& out) {
  out.push_back(&gain);
  out.push_back(&bias);
}

MultiHeadAttention::MultiHeadAttention(std::string name, int dim, int heads)
    : heads(heads),
      q(name + ".q", dim, dim),
      k(name + ".k", dim, dim),
      v(name + ".v", dim, dim),
      proj(name + ".proj", dim, dim) {
  require(heads > 0 && dim % heads == 0, "attention ", name, ": dim ", dim,
          " not divisible by ", heads, " heads");
}

void MultiHeadAttention::init(Rng& rng) {
  q.init(rng);
  k.init(rng);
  v.init(rng);
  proj.init(rng);
}

Var MultiHeadAttention::operator()(Graph& g, Var x, int batch, int tokens) {
  const Var attended = g.self_attention(q(g, x), k(g, x), v(g, x), batch,
                                        tokens, heads);
  return proj(g, attended);
}

void MultiHeadAttention::collect(std::vector<Parameter*>& out) {
  q.collect(out);
  k.collect(out);
  v.collect(out);
  proj.collect(out);
}

FeedForward::FeedForward(std::string name, int dim, int hidden)
    : fc1(name + ".fc1", dim, hidden), fc2(name + ".fc2", hidden, dim) {}

void FeedForward::init(Rng& rng) {
  fc1.init(rng);
  fc2.init(rng);
}

Var FeedForward::operator()(Graph& g, Var x) {
  return fc2(g, g.gelu(fc1(g, x)));
}

void FeedForward::collect(std::vector<Parameter*>& out) {
  fc1.collect(out);
  fc2.collect(out);
}

TransformerBlock::TransformerBlock(std::string name, int dim, int heads,
                                   int hidden)
    : ln1(name + ".ln1", dim),
      ln2(name + ".ln2", dim),
      attn(name + ".attn", dim, heads),
      ff(name + ".ff", dim, hidden) {}

void TransformerBlock::init(Rng& rng) {
  attn.init(rng);
  ff.init(rng);
}

Var TransformerBlock::operator()(Graph& g, Var x, int batch, int tokens) {
  x = g.add(x, attn(g, ln1(g, x), batch, tokens));
  x = g.add(x, ff(g, ln2(g, x)));
  return x;
}

void TransformerBlock::collect(std::vector<Parameter*>& out) {
  ln1.collect(out);
  ln2.collect(out);
  attn.collect(out);
  ff.collect(out);
}

SgdOptimizer::SgdOptimizer(std::vector<Parameter*> params,
                           double learning_rate, double momentum)
    : params_(std::move(params)), lr_(learning_rate), momentum_(momentum) {
  require(lr_ > 0.0, "sgd: learning rate must be positive, got ", lr_);
  require(momentum_ >= 0.0 && momentum_ < 1.0,
          "sgd: momentum must lie in [0,1), got ", momentum_);
}

void SgdOptimizer::step() {
  for (Parameter* p : params_) {
    p->momentum = momentum_ * p->momentum + p->grad;
    p->value -= lr_ * p->momentum;
    p->grad.setZero();
  }
}

void SgdOptimizer::zero_grad() {
  for (Parameter* p : params_) p->grad.setZero();
}

}  // namespace seadapt::nn
