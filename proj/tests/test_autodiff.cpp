// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "seadapt/graph.hpp"
#include "seadapt/nn.hpp"
#include "test_support.hpp"

using namespace seadapt;
using ad::Graph;
using ad::Mat;
using ad::Var;

namespace {

constexpr double kTol = 1e-6;

// Reduces any expression to a scalar through a fixed random weighting, so
// every output entry influences the loss.
Mat weights_like(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  return test::random_matrix(rows, cols, rng);
}

}  // namespace

TEST_CASE("gradcheck: elementwise arithmetic") {
  Rng rng(1);
  const Mat x = test::random_matrix(3, 4, rng);
  const Mat other = test::random_matrix(3, 4, rng);
  const Mat w = weights_like(3, 4, 100);

  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              const Var o = g.constant(other);
              return g.sum(g.cmul(g.add(in, o), g.constant(w)));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              const Var o = g.constant(other);
              return g.sum(g.cmul(g.sub(in, o), g.constant(w)));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.cmul(in, g.constant(other)), g.constant(w)));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.scale(in, -2.5), g.constant(w)));
            },
            x) < kTol);
  // Self-interaction: both operands are the same node.
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.cmul(in, in), g.constant(w)));
            },
            x) < kTol);
}

TEST_CASE("gradcheck: matmul and linear") {
  Rng rng(2);
  const Mat x = test::random_matrix(3, 5, rng);
  const Mat m = test::random_matrix(5, 4, rng);
  const Mat bias = test::random_matrix(1, 4, rng);
  const Mat w = weights_like(3, 4, 101);

  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.matmul(in, g.constant(m)), g.constant(w)));
            },
            x) < kTol);
  // Gradient through the right operand.
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              const Mat left = Mat::Ones(2, 3);
              return g.sum(g.cmul(g.matmul(g.constant(left), in),
                                  g.constant(weights_like(2, 5, 102))));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(
                  g.linear(in, g.constant(m), g.constant(bias)), g.constant(w)));
            },
            x) < kTol);
}

TEST_CASE("gradcheck: reductions and indexing") {
  Rng rng(3);
  const Mat x = test::random_matrix(4, 3, rng);

  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) { return g.sum(in); }, x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) { return g.mean(in); }, x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.rowsum(in), g.constant(weights_like(4, 1, 103))));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.select_rows(in, {2, 0}),
                                  g.constant(weights_like(2, 3, 104))));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              // Rows 1, 3 of a 4-row layout with stride 2.
              return g.sum(g.cmul(g.take_every(in, 2, 1, 2),
                                  g.constant(weights_like(2, 3, 105))));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.gather_cols(in, {1, 0, 2, 1}),
                                  g.constant(weights_like(4, 1, 106))));
            },
            x) < kTol);
}

TEST_CASE("select_rows may repeat rows and gradients accumulate") {
  Rng rng(31);
  const Mat x = test::random_matrix(3, 2, rng);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.select_rows(in, {1, 1, 2}),
                                  g.constant(weights_like(3, 2, 107))));
            },
            x) < kTol);
}

TEST_CASE("gradcheck: nonlinearities") {
  Rng rng(4);
  // Keep relu inputs away from the kink.
  Mat x = test::random_matrix(3, 4, rng);
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x.data()[i]) < 0.05) x.data()[i] = 0.2;
  }
  const Mat w = weights_like(3, 4, 108);

  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.relu(in), g.constant(w)));
            },
            x) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.gelu(in), g.constant(w)));
            },
            x, 1e-4) < 1e-5);

  const Mat positive = x.cwiseAbs().array() + 0.1;
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.log_eps(in, 1e-8), g.constant(w)));
            },
            positive) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.log_clamped(in, 1e-8), g.constant(w)));
            },
            positive) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.pow_const(in, 3.0), g.constant(w)));
            },
            positive) < kTol);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.softmax_rows(in), g.constant(w)));
            },
            x) < kTol);
}

TEST_CASE("log_clamped kills gradients below the floor") {
  Mat x(1, 2);
  x << 1e-12, 0.5;
  Graph g(true);
  const Var in = g.input(x);
  const Var out = g.sum(g.log_clamped(in, 1e-8));
  g.backward(out);
  const Mat grad = g.gradient(in);
  CHECK(grad(0, 0) == 0.0);
  CHECK(grad(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("gradcheck: layer norm") {
  Rng rng(5);
  const Mat x = test::random_matrix(3, 6, rng);
  const Mat gain = test::random_matrix(1, 6, rng);
  const Mat bias = test::random_matrix(1, 6, rng);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(
                  g.layer_norm(in, g.constant(gain), g.constant(bias)),
                  g.constant(weights_like(3, 6, 109))));
            },
            x) < 1e-5);
}

TEST_CASE("gradcheck: dropout with a pinned mask") {
  Rng rng(6);
  const Mat x = test::random_matrix(4, 5, rng);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              Rng mask_rng(77);
              return g.sum(g.cmul(g.dropout(in, 0.4, true, mask_rng),
                                  g.constant(weights_like(4, 5, 110))));
            },
            x) < kTol);
}

TEST_CASE("dropout is identity at rate zero or in inference") {
  Rng rng(7);
  const Mat x = test::random_matrix(2, 3, rng);
  Graph g(false);
  const Var in = g.input(x);
  Rng mask_rng(1);
  CHECK(g.value(g.dropout(in, 0.0, true, mask_rng)) == x);
  CHECK(g.value(g.dropout(in, 0.5, false, mask_rng)) == x);
}

TEST_CASE("inverted dropout preserves scale in expectation") {
  Rng rng(8);
  const Mat x = Mat::Ones(200, 50);
  Graph g(false);
  const Var in = g.input(x);
  Rng mask_rng(5);
  const Mat y = g.value(g.dropout(in, 0.3, true, mask_rng));
  CHECK(y.mean() == doctest::Approx(1.0).epsilon(0.03));
  // Survivors are scaled up by 1/(1-rate).
  for (int i = 0; i < 20; ++i) {
    const double v = y(0, i);
    CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.7)));
  }
}

TEST_CASE("gradcheck: attention and token ops") {
  Rng rng(9);
  const int batch = 2, tokens = 3, dim = 4, heads = 2;
  const Mat x = test::random_matrix(batch * tokens, dim, rng);
  const Mat wq = test::random_matrix(dim, dim, rng);
  const Mat wk = test::random_matrix(dim, dim, rng);
  const Mat wv = test::random_matrix(dim, dim, rng);

  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              const Var q = g.matmul(in, g.constant(wq));
              const Var k = g.matmul(in, g.constant(wk));
              const Var v = g.matmul(in, g.constant(wv));
              return g.sum(g.cmul(
                  g.self_attention(q, k, v, batch, tokens, heads),
                  g.constant(weights_like(batch * tokens, dim, 111))));
            },
            x, 1e-5) < 1e-5);
}

TEST_CASE("gradcheck: patchify and cls/pos") {
  Rng rng(10);
  const int batch = 2, hw = 4, patch = 2, channels = 1;
  const Mat images = test::random_matrix(batch, hw * hw * channels, rng);
  const ImageDims dims{hw, hw, channels};
  const int patches = (hw / patch) * (hw / patch);
  const int patch_dim = patch * patch * channels;

  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(
                  g.patchify(in, dims, patch),
                  g.constant(weights_like(batch * patches, patch_dim, 112))));
            },
            images) < kTol);

  const Mat tokens = test::random_matrix(batch * patches, 3, rng);
  const Mat cls = test::random_matrix(1, 3, rng);
  const Mat pos = test::random_matrix(patches + 1, 3, rng);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(
                  g.add_cls_pos(in, g.constant(cls), g.constant(pos), batch,
                                patches),
                  g.constant(weights_like(batch * (patches + 1), 3, 113))));
            },
            tokens) < kTol);
}

TEST_CASE("patchify lays out pixels patch by patch") {
  // A 2x2 image with one channel and patch size 1: each pixel is a patch.
  Mat image(1, 4);
  image << 1.0, 2.0, 3.0, 4.0;
  Graph g(false);
  const Var out = g.patchify(g.input(image), {2, 2, 1}, 1);
  const Mat& v = g.value(out);
  REQUIRE(v.rows() == 4);
  REQUIRE(v.cols() == 1);
  CHECK(v(0, 0) == 1.0);
  CHECK(v(1, 0) == 2.0);
  CHECK(v(2, 0) == 3.0);
  CHECK(v(3, 0) == 4.0);
}

TEST_CASE("gradcheck: cosine rows") {
  Rng rng(11);
  const Mat x = test::random_matrix(4, 6, rng);
  const Mat other = test::random_matrix(4, 6, rng);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(g.cosine_rows(in, g.constant(other)),
                                  g.constant(weights_like(4, 1, 114))));
            },
            x) < 1e-5);
  // Both sides differentiable.
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cosine_rows(in, g.scale(in, 2.0)));
            },
            x) < 1e-5);
}

TEST_CASE("cosine of a row with itself is nearly one") {
  Rng rng(12);
  const Mat x = test::random_matrix(3, 5, rng);
  Graph g(false);
  const Var in = g.input(x);
  const Mat c = g.value(g.cosine_rows(in, in));
  for (int i = 0; i < 3; ++i) CHECK(c(i, 0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("grad_reverse is identity forward, negation backward") {
  Rng rng(13);
  const Mat x = test::random_matrix(3, 4, rng);
  const Mat w = weights_like(3, 4, 115);

  Graph g(true);
  const Var in = g.input(x);
  const Var rev = g.grad_reverse(in, 1.0);
  CHECK(g.value(rev) == x);
  g.backward(g.sum(g.cmul(rev, g.constant(w))));
  const Mat grad_rev = g.gradient(in);

  Graph g2(true);
  const Var in2 = g2.input(x);
  g2.backward(g2.sum(g2.cmul(in2, g2.constant(w))));
  const Mat grad_plain = g2.gradient(in2);

  CHECK((grad_rev + grad_plain).cwiseAbs().maxCoeff() == 0.0);

  // rho scales the reversal.
  Graph g3(true);
  const Var in3 = g3.input(x);
  g3.backward(g3.sum(g3.cmul(g3.grad_reverse(in3, 0.5), g3.constant(w))));
  CHECK((g3.gradient(in3) + 0.5 * grad_plain).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("add_detached blocks gradient through the added term") {
  Rng rng(14);
  const Mat x = test::random_matrix(2, 3, rng);
  const Mat m = test::random_matrix(2, 3, rng);

  Graph g(true);
  const Var in = g.input(x);
  const Var out = g.add_detached(in, m);
  CHECK(g.value(out) == Mat(x + m));

  g.backward(g.sum(out));
  CHECK(g.gradient(in) == Mat::Ones(2, 3));
}

TEST_CASE("backward accumulates across shared subexpressions") {
  // y = sum(x) + sum(x): gradient must be 2 everywhere.
  Mat x = Mat::Ones(2, 2);
  Graph g(true);
  const Var in = g.input(x);
  const Var y = g.add(g.sum(in), g.sum(in));
  g.backward(y);
  CHECK(g.gradient(in) == Mat(2.0 * Mat::Ones(2, 2)));
}

TEST_CASE("parameters accumulate gradients across backward calls") {
  ad::Parameter p("p", 2, 2);
  p.value << 1.0, 2.0, 3.0, 4.0;

  Graph g(true);
  const Var v = g.param(p);
  g.backward(g.sum(v));
  CHECK(p.grad == Mat::Ones(2, 2));

  Graph g2(true);
  const Var v2 = g2.param(p);
  g2.backward(g2.sum(v2));
  CHECK(p.grad == Mat(2.0 * Mat::Ones(2, 2)));

  p.zero_grad();
  CHECK(p.grad == Mat::Zero(2, 2));
}

TEST_CASE("graphs without gradients refuse backward") {
  Graph g(false);
  const Var in = g.input(Mat::Ones(1, 1));
  CHECK_THROWS(g.backward(g.sum(in)));
}

TEST_CASE("backward requires a scalar loss") {
  Graph g(true);
  const Var in = g.input(Mat::Ones(2, 2));
  CHECK_THROWS(g.backward(in));
}

TEST_CASE("sgd momentum follows the classical update") {
  ad::Parameter p("p", 1, 1);
  p.value(0, 0) = 1.0;
  nn::SgdOptimizer opt({&p}, 0.1, 0.9);

  // Two steps of grad = 1:
  //   v1 = 1,     p = 1 - 0.1*1    = 0.9
  //   v2 = 1.9,   p = 0.9 - 0.19   = 0.71
  p.grad(0, 0) = 1.0;
  opt.step();
  CHECK(p.value(0, 0) == doctest::Approx(0.9));
  CHECK(p.grad(0, 0) == 0.0);

  p.grad(0, 0) = 1.0;
  opt.step();
  CHECK(p.value(0, 0) == doctest::Approx(0.71));
}

TEST_CASE("nn modules gradcheck end to end") {
  Rng rng(15);
  nn::Linear lin("lin", 4, 3);
  lin.init(rng);
  const Mat x = test::random_matrix(2, 4, rng);

  // d(out)/d(weights) via parameter gradients against finite differences.
  const auto loss_value = [&]() {
    Graph g(false);
    return g.scalar(g.sum(g.cmul(lin(g, g.constant(x)),
                                 g.constant(weights_like(2, 3, 116)))));
  };

  Graph g(true);
  g.backward(g.sum(g.cmul(lin(g, g.constant(x)),
                          g.constant(weights_like(2, 3, 116)))));
  const Mat analytic = lin.w.grad;

  const double h = 1e-5;
  Mat numeric(4, 3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double keep = lin.w.value(i, j);
      lin.w.value(i, j) = keep + h;
      const double up = loss_value();
      lin.w.value(i, j) = keep - h;
      const double down = loss_value();
      lin.w.value(i, j) = keep;
      numeric(i, j) = (up - down) / (2.0 * h);
    }
  }
  CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("transformer block gradchecks through its input") {
  Rng rng(16);
  const int batch = 2, tokens = 3, dim = 4;
  nn::TransformerBlock block("b", dim, 2, 8);
  block.init(rng);
  const Mat x = test::random_matrix(batch * tokens, dim, rng);
  CHECK(test::gradcheck_max_error(
            [&](Graph& g, Var in) {
              return g.sum(g.cmul(
                  block(g, in, batch, tokens),
                  g.constant(weights_like(batch * tokens, dim, 117))));
            },
            x, 1e-5) < 1e-4);
}
