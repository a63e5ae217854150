// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seadapt/rng.hpp"
#include "seadapt/tensor_io.hpp"

namespace seadapt::ad {

using Mat = Eigen::MatrixXd;

// A learnable tensor with its gradient accumulator and momentum buffer.
// Parameters live outside any Graph; graphs borrow them per forward pass.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat momentum;

  Parameter() = default;
  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)),
        value(Mat::Zero(rows, cols)),
        grad(Mat::Zero(rows, cols)),
        momentum(Mat::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

// Handle to a node on a Graph tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff on a write-once tape of Eigen matrices.
//
// Every operation appends a node holding its value and, when gradients are
// enabled and some ancestor requires them, a backward closure. backward()
// walks the tape in reverse (creation order is already topological) and
// accumulates into Parameter::grad. A graph built with gradients disabled
// skips all closure bookkeeping and serves as the inference path.
//
// Token sequences are laid out as (batch*tokens) x channels matrices; image
// batches as batch x (height*width*channels) rows.
class Graph {
 public:
  explicit Graph(bool grad_enabled = true);

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  // --- leaves ---------------------------------------------------------
  Var constant(Mat v);
  // Differentiable leaf; its gradient is readable after backward().
  Var input(Mat v);
  Var param(Parameter& p);

  // --- arithmetic ------------------------------------------------------
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);  // elementwise
  Var scale(Var a, double s);
  // a + m with m treated as data: nothing flows back into m's origin.
  Var add_detached(Var a, const Mat& m);
  Var matmul(Var a, Var b);
  // x*w with a broadcast row bias.
  Var linear(Var x, Var w, Var b);

  // --- reductions and indexing ----------------------------------------
  Var sum(Var a);   // 1x1
  Var mean(Var a);  // 1x1
  Var rowsum(Var a);
  Var select_rows(Var a, std::vector<int> rows);
  // Rows offset, offset+stride, ... (count of them); extracts per-sample
  // class-token rows from a token layout.
  Var take_every(Var a, int stride, int offset, int count);
  // out(i, 0) = a(i, col[i]).
  Var gather_cols(Var a, std::vector<int> col_of_row);

  // --- nonlinearities ---------------------------------------------------
  Var relu(Var a);
  Var gelu(Var a);
  // log(a + eps): stabilized log for ratio-style uses.
  Var log_eps(Var a, double eps);
  // log(max(a, floor)): exact at a=1, clamped below; gradient is zero in
  // the clamped region.
  Var log_clamped(Var a, double floor);
  Var pow_const(Var a, double exponent);
  Var softmax_rows(Var a);
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  // Inverted dropout; identity when training is false or rate is zero.
  Var dropout(Var a, double rate, bool training, Rng& rng);

  // --- token and attention ops ------------------------------------------
  // Multi-head self-attention over q/k/v projections, each laid out as
  // (batch*tokens) x dim.
  Var self_attention(Var q, Var k, Var v, int batch, int tokens, int heads);
  // batch x pixels image rows -> (batch*patches) x (patch*patch*channels).
  Var patchify(Var images, const ImageDims& dims, int patch);
  // Prepends a class token and adds positional embeddings:
  // (batch*patches) x dim -> (batch*(patches+1)) x dim.
  Var add_cls_pos(Var tokens, Var cls, Var pos, int batch, int patches);

  // --- adaptation-specific ops ------------------------------------------
  // Identity forward; multiplies the upstream gradient by -rho on the way
  // back.
  Var grad_reverse(Var a, double rho);
  // Row-wise cosine similarity, stabilized: dot / (|a||b| + eps).
  Var cosine_rows(Var a, Var b, double eps = 1e-8);

  // --- access ------------------------------------------------------------
  const Mat& value(Var v) const;
  double scalar(Var v) const;
  // Gradient at a node (valid after backward on a graph with gradients
  // enabled; zero matrix for nodes the loss does not reach).
  const Mat& gradient(Var v) const;

  // Seeds d(loss)/d(loss)=1 and accumulates gradients into every reachable
  // Parameter::grad (adding to whatever is already there) and input node.
  // The loss must be 1x1.
  void backward(Var loss);

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs = false;
    std::function<void(Graph&, const Node&)> back;
  };

  Var make(Mat value, bool needs,
           std::function<void(Graph&, const Node&)> back);
  Node& node(Var v);
  const Node& node(Var v) const;
  bool track(std::initializer_list<Var> parents) const;
  void bump(Var parent, const Mat& g);

  std::vector<Node> nodes_;
  bool grad_enabled_;
};

}  // namespace seadapt::ad
