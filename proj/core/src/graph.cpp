// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/graph.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <utility>

#include "seadapt/common.hpp"

namespace seadapt::ad {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

}  // namespace

Graph::Graph(bool grad_enabled) : grad_enabled_(grad_enabled) {}

Var Graph::make(Mat value, bool needs,
                std::function<void(Graph&, const Node&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs = grad_enabled_ && needs;
  if (n.needs) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.back = std::move(back);
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Graph::Node& Graph::node(Var v) {
  require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(),
          "graph: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Graph::Node& Graph::node(Var v) const {
  require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(),
          "graph: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

bool Graph::track(std::initializer_list<Var> parents) const {
  if (!grad_enabled_) return false;
  for (const Var p : parents)
    if (node(p).needs) return true;
  return false;
}

void Graph::bump(Var parent, const Mat& g) {
  Node& n = node(parent);
  if (n.needs) n.grad += g;
}

const Mat& Graph::value(Var v) const { return node(v).value; }

double Graph::scalar(Var v) const {
  const Mat& m = node(v).value;
  require(m.rows() == 1 && m.cols() == 1, "graph: node is ", m.rows(), "x",
          m.cols(), ", expected a scalar");
  return m(0, 0);
}

const Mat& Graph::gradient(Var v) const {
  const Node& n = node(v);
  require(n.needs, "graph: node does not carry a gradient");
  return n.grad;
}

void Graph::backward(Var loss) {
  require(grad_enabled_, "graph: backward on a gradient-disabled graph");
  Node& top = node(loss);
  require(top.value.rows() == 1 && top.value.cols() == 1,
          "graph: backward target must be a scalar");
  for (auto& n : nodes_)
    if (n.needs) n.grad.setZero();
  if (!top.needs) return;  // loss depends on no differentiable leaf
  top.grad(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.needs && n.back) n.back(*this, n);
  }
}

// --- leaves ---------------------------------------------------------------

Var Graph::constant(Mat v) { return make(std::move(v), false, nullptr); }

Var Graph::input(Mat v) {
  // No closure: the gradient parks on the node itself.
  return make(std::move(v), true, nullptr);
}

Var Graph::param(Parameter& p) {
  Parameter* pp = &p;
  return make(p.value, true, [pp](Graph&, const Node& n) {
    pp->grad += n.grad;
  });
}

// --- arithmetic -------------------------------------------------------------

Var Graph::add(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(),
          "add: shape mismatch ", av.rows(), "x", av.cols(), " vs ", bv.rows(),
          "x", bv.cols());
  return make(av + bv, track({a, b}), [a, b](Graph& g, const Node& n) {
    g.bump(a, n.grad);
    g.bump(b, n.grad);
  });
}

Var Graph::sub(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(),
          "sub: shape mismatch ", av.rows(), "x", av.cols(), " vs ", bv.rows(),
          "x", bv.cols());
  return make(av - bv, track({a, b}), [a, b](Graph& g, const Node& n) {
    g.bump(a, n.grad);
    g.bump(b, -n.grad);
  });
}

Var Graph::cmul(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(),
          "cmul: shape mismatch ", av.rows(), "x", av.cols(), " vs ",
          bv.rows(), "x", bv.cols());
  return make(av.cwiseProduct(bv), track({a, b}),
              [a, b](Graph& g, const Node& n) {
                g.bump(a, n.grad.cwiseProduct(g.value(b)));
                g.bump(b, n.grad.cwiseProduct(g.value(a)));
              });
}

Var Graph::scale(Var a, double s) {
  return make(value(a) * s, track({a}), [a, s](Graph& g, const Node& n) {
    g.bump(a, s * n.grad);
  });
}

Var Graph::add_detached(Var a, const Mat& m) {
  const Mat& av = value(a);
  require(av.rows() == m.rows() && av.cols() == m.cols(),
          "add_detached: shape mismatch ", av.rows(), "x", av.cols(), " vs ",
          m.rows(), "x", m.cols());
  return make(av + m, track({a}), [a](Graph& g, const Node& n) {
    g.bump(a, n.grad);
  });
}

Var Graph::matmul(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  require(av.cols() == bv.rows(), "matmul: inner dimensions ", av.cols(),
          " and ", bv.rows(), " differ");
  return make(av * bv, track({a, b}), [a, b](Graph& g, const Node& n) {
    g.bump(a, n.grad * g.value(b).transpose());
    g.bump(b, g.value(a).transpose() * n.grad);
  });
}

Var Graph::linear(Var x, Var w, Var b) {
  const Mat& xv = value(x);
  const Mat& wv = value(w);
  const Mat& bv = value(b);
  require(xv.cols() == wv.rows(), "linear: input dim ", xv.cols(),
          " does not match weight rows ", wv.rows());
  require(bv.rows() == 1 && bv.cols() == wv.cols(), "linear: bias must be 1x",
          wv.cols(), ", got ", bv.rows(), "x", bv.cols());
  Mat out = xv * wv;
  out.rowwise() += bv.row(0);
  return make(std::move(out), track({x, w, b}),
              [x, w, b](Graph& g, const Node& n) {
                g.bump(x, n.grad * g.value(w).transpose());
                g.bump(w, g.value(x).transpose() * n.grad);
                g.bump(b, n.grad.colwise().sum());
              });
}

// --- reductions and indexing -------------------------------------------------

Var Graph::sum(Var a) {
  Mat out(1, 1);
  out(0, 0) = value(a).sum();
  return make(std::move(out), track({a}), [a](Graph& g, const Node& n) {
    const Mat& av = g.value(a);
    g.bump(a, Mat::Constant(av.rows(), av.cols(), n.grad(0, 0)));
  });
}

Var Graph::mean(Var a) {
  const Mat& av = value(a);
  require(av.size() > 0, "mean: empty matrix");
  Mat out(1, 1);
  out(0, 0) = av.mean();
  return make(std::move(out), track({a}), [a](Graph& g, const Node& n) {
    const Mat& av = g.value(a);
    const double d = n.grad(0, 0) / static_cast<double>(av.size());
    g.bump(a, Mat::Constant(av.rows(), av.cols(), d));
  });
}

Var Graph::rowsum(Var a) {
  return make(value(a).rowwise().sum(), track({a}),
              [a](Graph& g, const Node& n) {
                g.bump(a, n.grad.replicate(1, g.value(a).cols()));
              });
}

Var Graph::select_rows(Var a, std::vector<int> rows) {
  const Mat& av = value(a);
  Mat out(static_cast<int>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < av.rows(), "select_rows: row ", rows[i],
            " out of range [0,", av.rows(), ")");
    out.row(static_cast<int>(i)) = av.row(rows[i]);
  }
  return make(std::move(out), track({a}),
              [a, rows = std::move(rows)](Graph& g, const Node& n) {
                const Mat& av = g.value(a);
                Mat ga = Mat::Zero(av.rows(), av.cols());
                for (std::size_t i = 0; i < rows.size(); ++i)
                  ga.row(rows[i]) += n.grad.row(static_cast<int>(i));
                g.bump(a, ga);
              });
}

Var Graph::take_every(Var a, int stride, int offset, int count) {
  const Mat& av = value(a);
  require(stride > 0 && offset >= 0 && count > 0,
          "take_every: bad arguments");
  require(offset + static_cast<long>(stride) * (count - 1) < av.rows(),
          "take_every: stride ", stride, " offset ", offset, " count ", count,
          " exceeds ", av.rows(), " rows");
  Mat out(count, av.cols());
  for (int i = 0; i < count; ++i) out.row(i) = av.row(offset + i * stride);
  return make(std::move(out), track({a}),
              [a, stride, offset, count](Graph& g, const Node& n) {
                const Mat& av = g.value(a);
                Mat ga = Mat::Zero(av.rows(), av.cols());
                for (int i = 0; i < count; ++i)
                  ga.row(offset + i * stride) = n.grad.row(i);
                g.bump(a, ga);
              });
}

Var Graph::gather_cols(Var a, std::vector<int> col_of_row) {
  const Mat& av = value(a);
  require(static_cast<long>(col_of_row.size()) == av.rows(),
          "gather_cols: need one column index per row");
  Mat out(av.rows(), 1);
  for (int i = 0; i < av.rows(); ++i) {
    require(col_of_row[static_cast<std::size_t>(i)] >= 0 &&
                col_of_row[static_cast<std::size_t>(i)] < av.cols(),
            "gather_cols: column index out of range at row ", i);
    out(i, 0) = av(i, col_of_row[static_cast<std::size_t>(i)]);
  }
  return make(std::move(out), track({a}),
              [a, cols = std::move(col_of_row)](Graph& g, const Node& n) {
                const Mat& av = g.value(a);
                Mat ga = Mat::Zero(av.rows(), av.cols());
                for (int i = 0; i < av.rows(); ++i)
                  ga(i, cols[static_cast<std::size_t>(i)]) += n.grad(i, 0);
                g.bump(a, ga);
              });
}

// --- nonlinearities -----------------------------------------------------------

Var Graph::relu(Var a) {
  return make(value(a).cwiseMax(0.0), track({a}),
              [a](Graph& g, const Node& n) {
                const Mat mask =
                    (g.value(a).array() > 0.0).cast<double>().matrix();
                g.bump(a, n.grad.cwiseProduct(mask));
              });
}

Var Graph::gelu(Var a) {
  // Exact (erf) form.
  Mat out = value(a).unaryExpr([](double x) {
    return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  });
  return make(std::move(out), track({a}), [a](Graph& g, const Node& n) {
    const Mat deriv = g.value(a).unaryExpr([](double x) {
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      return cdf + x * pdf;
    });
    g.bump(a, n.grad.cwiseProduct(deriv));
  });
}

Var Graph::log_eps(Var a, double eps) {
  require(eps > 0.0, "log_eps: eps must be positive");
  Mat out = (value(a).array() + eps).log().matrix();
  return make(std::move(out), track({a}), [a, eps](Graph& g, const Node& n) {
    g.bump(a, (n.grad.array() / (g.value(a).array() + eps)).matrix());
  });
}

Var Graph::log_clamped(Var a, double floor) {
  require(floor > 0.0, "log_clamped: floor must be positive");
  Mat out = value(a).unaryExpr(
      [floor](double x) { return std::log(std::max(x, floor)); });
  return make(std::move(out), track({a}),
              [a, floor](Graph& g, const Node& n) {
                const Mat& av = g.value(a);
                Mat ga(av.rows(), av.cols());
                for (int i = 0; i < av.rows(); ++i)
                  for (int j = 0; j < av.cols(); ++j)
                    ga(i, j) =
                        av(i, j) > floor ? n.grad(i, j) / av(i, j) : 0.0;
                g.bump(a, ga);
              });
}

Var Graph::pow_const(Var a, double exponent) {
  const Mat& av = value(a);
  if (exponent == 0.0) {
    // Constant one with zero derivative everywhere, including at a=0.
    return constant(Mat::Ones(av.rows(), av.cols()));
  }
  if (exponent == 1.0) {
    return make(av, track({a}), [a](Graph& g, const Node& n) {
      g.bump(a, n.grad);
    });
  }
  Mat out = av.array().pow(exponent).matrix();
  return make(std::move(out), track({a}),
              [a, exponent](Graph& g, const Node& n) {
                // Bases are nonnegative by contract; clamp keeps the
                // derivative finite at 0 for exponents below 1.
                const Mat deriv =
                    g.value(a).unaryExpr([exponent](double x) {
                      const double base =
                          exponent < 1.0 ? std::max(x, 1e-12) : x;
                      return exponent * std::pow(base, exponent - 1.0);
                    });
                g.bump(a, n.grad.cwiseProduct(deriv));
              });
}

Var Graph::softmax_rows(Var a) {
  const Mat& av = value(a);
  Mat out(av.rows(), av.cols());
  for (int i = 0; i < av.rows(); ++i) {
    const double m = av.row(i).maxCoeff();
    Eigen::ArrayXd e = (av.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return make(std::move(out), track({a}), [a](Graph& g, const Node& n) {
    const Mat& y = n.value;
    Mat ga(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i) {
      const double dot = n.grad.row(i).dot(y.row(i));
      ga.row(i) =
          (y.row(i).array() * (n.grad.row(i).array() - dot)).matrix();
    }
    g.bump(a, ga);
  });
}

Var Graph::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Mat& xv = value(x);
  const Mat& gv = value(gain);
  const Mat& bv = value(bias);
  const int cols = static_cast<int>(xv.cols());
  require(gv.rows() == 1 && gv.cols() == cols, "layer_norm: gain must be 1x",
          cols);
  require(bv.rows() == 1 && bv.cols() == cols, "layer_norm: bias must be 1x",
          cols);

  auto xhat = std::make_shared<Mat>(xv.rows(), cols);
  auto inv = std::make_shared<Eigen::VectorXd>(xv.rows());
  Mat out(xv.rows(), cols);
  for (int i = 0; i < xv.rows(); ++i) {
    const double mu = xv.row(i).mean();
    const Eigen::ArrayXd centered = xv.row(i).array() - mu;
    const double var = centered.square().mean();
    const double iv = 1.0 / std::sqrt(var + eps);
    (*inv)(i) = iv;
    xhat->row(i) = (centered * iv).matrix();
    out.row(i) =
        (xhat->row(i).array() * gv.row(0).array() + bv.row(0).array())
            .matrix();
  }
  return make(std::move(out), track({x, gain, bias}),
              [x, gain, bias, xhat, inv](Graph& g, const Node& n) {
                const Mat& gv = g.value(gain);
                g.bump(gain, (n.grad.cwiseProduct(*xhat)).colwise().sum());
                g.bump(bias, n.grad.colwise().sum());
                Mat ga(n.grad.rows(), n.grad.cols());
                for (int i = 0; i < n.grad.rows(); ++i) {
                  const Eigen::ArrayXd h =
                      n.grad.row(i).array() * gv.row(0).array();
                  const Eigen::ArrayXd xh = xhat->row(i).array();
                  const double hm = h.mean();
                  const double hxm = (h * xh).mean();
                  ga.row(i) = ((*inv)(i) * (h - hm - xh * hxm)).matrix();
                }
                g.bump(x, ga);
              });
}

Var Graph::dropout(Var a, double rate, bool training, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must lie in [0,1), got ",
          rate);
  if (!training || rate == 0.0) return a;
  const Mat& av = value(a);
  auto mask = std::make_shared<Mat>(av.rows(), av.cols());
  const double keep = 1.0 - rate;
  // Row-major draw order, so the consumed stream is layout-independent.
  for (int i = 0; i < av.rows(); ++i)
    for (int j = 0; j < av.cols(); ++j)
      (*mask)(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  return make(av.cwiseProduct(*mask), track({a}),
              [a, mask](Graph& g, const Node& n) {
                g.bump(a, n.grad.cwiseProduct(*mask));
              });
}

// --- token and attention ops ----------------------------------------------

Var Graph::self_attention(Var q, Var k, Var v, int batch, int tokens,
                          int heads) {
  const Mat& qv = value(q);
  const Mat& kv = value(k);
  const Mat& vv = value(v);
  const int dim = static_cast<int>(qv.cols());
  require(qv.rows() == kv.rows() && kv.rows() == vv.rows() &&
              qv.cols() == kv.cols() && kv.cols() == vv.cols(),
          "self_attention: q/k/v shapes differ");
  require(qv.rows() == static_cast<long>(batch) * tokens,
          "self_attention: rows ", qv.rows(), " != batch ", batch,
          " * tokens ", tokens);
  require(heads > 0 && dim % heads == 0, "self_attention: dim ", dim,
          " not divisible by heads ", heads);
  const int dh = dim / heads;
  const double alpha = 1.0 / std::sqrt(static_cast<double>(dh));

  auto attn = std::make_shared<std::vector<Mat>>();
  const bool tracked = track({q, k, v});
  if (tracked) attn->reserve(static_cast<std::size_t>(batch) * heads);

  Mat out(qv.rows(), dim);
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = qv.block(b * tokens, h * dh, tokens, dh);
      const auto kb = kv.block(b * tokens, h * dh, tokens, dh);
      const auto vb = vv.block(b * tokens, h * dh, tokens, dh);
      Mat scores = alpha * (qb * kb.transpose());
      Mat a(tokens, tokens);
      for (int i = 0; i < tokens; ++i) {
        const double m = scores.row(i).maxCoeff();
        Eigen::ArrayXd e = (scores.row(i).array() - m).exp();
        a.row(i) = (e / e.sum()).matrix();
      }
      out.block(b * tokens, h * dh, tokens, dh) = a * vb;
      if (tracked) attn->push_back(std::move(a));
    }
  }
  return make(std::move(out), tracked,
              [q, k, v, batch, tokens, heads, dh, alpha, attn](
                  Graph& g, const Node& n) {
                const Mat& qv = g.value(q);
                const Mat& kv = g.value(k);
                const Mat& vv = g.value(v);
                Mat gq = Mat::Zero(qv.rows(), qv.cols());
                Mat gk = Mat::Zero(kv.rows(), kv.cols());
                Mat gv = Mat::Zero(vv.rows(), vv.cols());
                for (int b = 0; b < batch; ++b) {
                  for (int h = 0; h < heads; ++h) {
                    const Mat& a =
                        (*attn)[static_cast<std::size_t>(b) * heads + h];
                    const auto qb = qv.block(b * tokens, h * dh, tokens, dh);
                    const auto kb = kv.block(b * tokens, h * dh, tokens, dh);
                    const auto vb = vv.block(b * tokens, h * dh, tokens, dh);
                    const auto go =
                        n.grad.block(b * tokens, h * dh, tokens, dh);
                    const Mat da = go * vb.transpose();
                    gv.block(b * tokens, h * dh, tokens, dh) +=
                        a.transpose() * go;
                    Mat ds(tokens, tokens);
                    for (int i = 0; i < tokens; ++i) {
                      const double dot = da.row(i).dot(a.row(i));
                      ds.row(i) =
                          (a.row(i).array() * (da.row(i).array() - dot))
                              .matrix();
                    }
                    gq.block(b * tokens, h * dh, tokens, dh) +=
                        alpha * (ds * kb);
                    gk.block(b * tokens, h * dh, tokens, dh) +=
                        alpha * (ds.transpose() * qb);
                  }
                }
                g.bump(q, gq);
                g.bump(k, gk);
                g.bump(v, gv);
              });
}

namespace {

// Flat pixel index of (y, x, ch) in a row-major (y, x, channel) image.
inline int pixel_index(int y, int x, int ch, const ImageDims& d) {
  return (y * d.width + x) * d.channels + ch;
}

}  // namespace

Var Graph::patchify(Var images, const ImageDims& dims, int patch) {
  const Mat& iv = value(images);
  require(patch > 0 && dims.height % patch == 0 && dims.width % patch == 0,
          "patchify: image ", dims.height, "x", dims.width,
          " not divisible by patch ", patch);
  require(iv.cols() == dims.pixels(), "patchify: image row length ",
          iv.cols(), " does not match dims");
  const int batch = static_cast<int>(iv.rows());
  const int px = dims.width / patch;
  const int py = dims.height / patch;
  const int patches = px * py;
  const int pdim = patch * patch * dims.channels;

  Mat out(static_cast<long>(batch) * patches, pdim);
  for (int b = 0; b < batch; ++b) {
    for (int gy = 0; gy < py; ++gy) {
      for (int gx = 0; gx < px; ++gx) {
        const int row = b * patches + gy * px + gx;
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx)
            for (int ch = 0; ch < dims.channels; ++ch)
              out(row, (dy * patch + dx) * dims.channels + ch) = iv(
                  b, pixel_index(gy * patch + dy, gx * patch + dx, ch, dims));
      }
    }
  }
  return make(std::move(out), track({images}),
              [images, dims, patch, batch, px, py, patches](
                  Graph& g, const Node& n) {
                const Mat& iv = g.value(images);
                Mat gi = Mat::Zero(iv.rows(), iv.cols());
                for (int b = 0; b < batch; ++b)
                  for (int gy = 0; gy < py; ++gy)
                    for (int gx = 0; gx < px; ++gx) {
                      const int row = b * patches + gy * px + gx;
                      for (int dy = 0; dy < patch; ++dy)
                        for (int dx = 0; dx < patch; ++dx)
                          for (int ch = 0; ch < dims.channels; ++ch)
                            gi(b, pixel_index(gy * patch + dy, gx * patch + dx,
                                              ch, dims)) +=
                                n.grad(row,
                                       (dy * patch + dx) * dims.channels + ch);
                    }
                g.bump(images, gi);
              });
}

Var Graph::add_cls_pos(Var tokens, Var cls, Var pos, int batch, int patches) {
  const Mat& tv = value(tokens);
  const Mat& cv = value(cls);
  const Mat& pv = value(pos);
  const int dim = static_cast<int>(tv.cols());
  require(tv.rows() == static_cast<long>(batch) * patches,
          "add_cls_pos: token rows ", tv.rows(), " != batch ", batch,
          " * patches ", patches);
  require(cv.rows() == 1 && cv.cols() == dim,
          "add_cls_pos: class token must be 1x", dim);
  require(pv.rows() == patches + 1 && pv.cols() == dim,
          "add_cls_pos: positional table must be ", patches + 1, "x", dim);

  const int t = patches + 1;
  Mat out(static_cast<long>(batch) * t, dim);
  for (int b = 0; b < batch; ++b) {
    out.row(b * t) = cv.row(0) + pv.row(0);
    for (int j = 0; j < patches; ++j)
      out.row(b * t + 1 + j) = tv.row(b * patches + j) + pv.row(1 + j);
  }
  return make(std::move(out), track({tokens, cls, pos}),
              [tokens, cls, pos, batch, patches, t](Graph& g, const Node& n) {
                const Mat& tv = g.value(tokens);
                Mat gt(tv.rows(), tv.cols());
                Mat gc = Mat::Zero(1, tv.cols());
                Mat gp = Mat::Zero(t, tv.cols());
                for (int b = 0; b < batch; ++b) {
                  gc.row(0) += n.grad.row(b * t);
                  gp.row(0) += n.grad.row(b * t);
                  for (int j = 0; j < patches; ++j) {
                    gt.row(b * patches + j) = n.grad.row(b * t + 1 + j);
                    gp.row(1 + j) += n.grad.row(b * t + 1 + j);
                  }
                }
                g.bump(tokens, gt);
                g.bump(cls, gc);
                g.bump(pos, gp);
              });
}

// --- adaptation-specific ops -------------------------------------------------

Var Graph::grad_reverse(Var a, double rho) {
  return make(value(a), track({a}), [a, rho](Graph& g, const Node& n) {
    g.bump(a, (-rho) * n.grad);
  });
}

Var Graph::cosine_rows(Var a, Var b, double eps) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(),
          "cosine_rows: shape mismatch ", av.rows(), "x", av.cols(), " vs ",
          bv.rows(), "x", bv.cols());
  require(eps > 0.0, "cosine_rows: eps must be positive");

  const int n_rows = static_cast<int>(av.rows());
  auto na = std::make_shared<Eigen::VectorXd>(n_rows);
  auto nb = std::make_shared<Eigen::VectorXd>(n_rows);
  Mat out(n_rows, 1);
  for (int i = 0; i < n_rows; ++i) {
    (*na)(i) = av.row(i).norm();
    (*nb)(i) = bv.row(i).norm();
    out(i, 0) = av.row(i).dot(bv.row(i)) / ((*na)(i) * (*nb)(i) + eps);
  }
  return make(std::move(out), track({a, b}),
              [a, b, na, nb, eps](Graph& g, const Node& n) {
                const Mat& av = g.value(a);
                const Mat& bv = g.value(b);
                Mat ga = Mat::Zero(av.rows(), av.cols());
                Mat gb = Mat::Zero(bv.rows(), bv.cols());
                for (int i = 0; i < av.rows(); ++i) {
                  const double gi = n.grad(i, 0);
                  if (gi == 0.0) continue;
                  const double c = n.value(i, 0);
                  const double d = (*na)(i) * (*nb)(i) + eps;
                  const double nas = std::max((*na)(i), 1e-12);
                  const double nbs = std::max((*nb)(i), 1e-12);
                  ga.row(i) = gi * (bv.row(i) / d -
                                    (c * (*nb)(i) / (d * nas)) * av.row(i));
                  gb.row(i) = gi * (av.row(i) / d -
                                    (c * (*na)(i) / (d * nbs)) * bv.row(i));
                }
                g.bump(a, ga);
                g.bump(b, gb);
              });
}

}  // namespace seadapt::ad
