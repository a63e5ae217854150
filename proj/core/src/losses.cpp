// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/losses.hpp"

#include <cmath>

#include "seadapt/common.hpp"

namespace seadapt {

namespace losses {

using ad::Graph;
using ad::Mat;
using ad::Var;

Var cross_entropy_rows(Graph& g, Var probs, const std::vector<int>& labels) {
  const Mat& pv = g.value(probs);
  require(pv.rows() == static_cast<long>(labels.size()),
          "cross_entropy: ", labels.size(), " labels for ", pv.rows(),
          " probability rows");
  for (std::size_t i = 0; i < labels.size(); ++i)
    require(labels[i] >= 0 && labels[i] < pv.cols(), "cross_entropy: label ",
            labels[i], " outside [0,", pv.cols(), ") at row ", i);
  const Var py = g.gather_cols(probs, labels);
  return g.scale(g.log_clamped(py, kLossEpsilon), -1.0);
}

Var focal_rows(Graph& g, Var probs, const std::vector<int>& labels,
               double tau) {
  require(tau >= 0.0, "focal: tau must be nonnegative, got ", tau);
  const Var ce = cross_entropy_rows(g, probs, labels);
  if (tau == 0.0) return ce;
  const Var py = g.gather_cols(probs, labels);
  const Var base = g.sub(
      g.constant(Mat::Ones(g.value(py).rows(), 1)), py);
  return g.cmul(g.pow_const(base, tau), ce);
}

Var focal_loss(Graph& g, Var probs, const std::vector<int>& labels,
               double tau) {
  require(!labels.empty(), "focal: empty batch");
  return g.mean(focal_rows(g, probs, labels, tau));
}

Var domain_adversarial(Graph& g, Var domain_probs,
                       const std::vector<int>& domain_of_row) {
  const Mat& pv = g.value(domain_probs);
  require(pv.cols() == 2, "domain loss: expected 2 columns, got ", pv.cols());
  require(pv.rows() == static_cast<long>(domain_of_row.size()),
          "domain loss: ", domain_of_row.size(), " domain flags for ",
          pv.rows(), " rows");
  std::vector<int> src_rows;
  std::vector<int> tgt_rows;
  for (std::size_t i = 0; i < domain_of_row.size(); ++i) {
    require(domain_of_row[i] == 0 || domain_of_row[i] == 1,
            "domain loss: flag must be 0 or 1, got ", domain_of_row[i]);
    (domain_of_row[i] == 0 ? src_rows : tgt_rows)
        .push_back(static_cast<int>(i));
  }
  require(!src_rows.empty() && !tgt_rows.empty(),
          "domain loss: batch must contain both domains (",
          src_rows.size(), " source, ", tgt_rows.size(), " target)");

  const auto mean_log_true = [&](const std::vector<int>& rows, int col) {
    const Var sel = g.select_rows(domain_probs, rows);
    const Var q =
        g.gather_cols(sel, std::vector<int>(rows.size(), col));
    return g.mean(g.log_clamped(q, kLossEpsilon));
  };
  return g.scale(g.add(mean_log_true(src_rows, 0), mean_log_true(tgt_rows, 1)),
                 -1.0);
}

Var skd(Graph& g, Var enhanced, const Mat& text_embeddings,
        const Mat& image_embeddings) {
  const Mat& ev = g.value(enhanced);
  require(ev.rows() > 0, "skd: empty batch");
  require(text_embeddings.rows() == ev.rows() &&
              image_embeddings.rows() == ev.rows(),
          "skd: teacher rows (", text_embeddings.rows(), " text, ",
          image_embeddings.rows(), " image) do not match ", ev.rows(),
          " enhanced rows");
  require(text_embeddings.cols() == ev.cols() &&
              image_embeddings.cols() == ev.cols(),
          "skd: teacher dimension does not match enhanced dimension ",
          ev.cols());
  const Var text_cos =
      g.cosine_rows(enhanced, g.constant(text_embeddings), kLossEpsilon);
  const Var image_cos =
      g.cosine_rows(enhanced, g.constant(image_embeddings), kLossEpsilon);
  return g.scale(g.mean(g.add(text_cos, image_cos)), -1.0);
}

Var kl_rows(Graph& g, Var p, Var q) {
  const Mat& pv = g.value(p);
  const Mat& qv = g.value(q);
  require(pv.rows() == qv.rows() && pv.cols() == qv.cols(),
          "kl: shape mismatch ", pv.rows(), "x", pv.cols(), " vs ", qv.rows(),
          "x", qv.cols());
  const Var log_ratio =
      g.sub(g.log_eps(p, kLossEpsilon), g.log_eps(q, kLossEpsilon));
  return g.rowsum(g.cmul(p, log_ratio));
}

Var offset_refinement(Graph& g, Var p, Var p_tilde, double kappa, int omega) {
  require(omega == 0 || omega == 1, "offset loss: omega must be 0 or 1, got ",
          omega);
  require(kappa >= 0.0 && kappa <= 1.0,
          "offset loss: kappa must lie in [0,1], got ", kappa);
  const Mat& pv = g.value(p);
  const Mat& qv = g.value(p_tilde);
  require(pv.rows() == qv.rows() && pv.cols() == qv.cols(),
          "offset loss: shape mismatch");

  const std::vector<int> keep =
      confidence_filter(omega == 1 ? pv : qv, kappa);
  if (keep.empty()) return g.constant(Mat::Zero(1, 1));

  const Var ps = g.select_rows(p, keep);
  const Var qs = g.select_rows(p_tilde, keep);
  return omega == 1 ? g.mean(kl_rows(g, ps, qs)) : g.mean(kl_rows(g, qs, ps));
}

}  // namespace losses

namespace {

// Evaluates a builder on a gradient-free graph.
template <typename Fn>
double eval_scalar(Fn&& fn) {
  ad::Graph g(false);
  return g.scalar(fn(g));
}

}  // namespace

double cross_entropy(const Eigen::VectorXd& p, int y) {
  require(p.size() > 0, "cross_entropy: empty probability vector");
  require(y >= 0 && y < p.size(), "cross_entropy: label ", y, " outside [0,",
          p.size(), ")");
  ad::Graph g(false);
  const ad::Var probs = g.constant(p.transpose());
  return g.scalar(g.mean(losses::cross_entropy_rows(g, probs, {y})));
}

Eigen::VectorXd per_sample_cross_entropy(const ad::Mat& probs,
                                         const std::vector<int>& labels) {
  ad::Graph g(false);
  return g.value(losses::cross_entropy_rows(g, g.constant(probs), labels))
      .col(0);
}

double focal_loss(const ad::Mat& probs, const std::vector<int>& labels,
                  double tau) {
  return eval_scalar([&](ad::Graph& g) {
    return losses::focal_loss(g, g.constant(probs), labels, tau);
  });
}

double domain_adversarial_loss(const Eigen::VectorXd& q_source,
                               const Eigen::VectorXd& q_target) {
  require(q_source.size() > 0 && q_target.size() > 0,
          "domain loss: batch must contain both domains (", q_source.size(),
          " source, ", q_target.size(), " target)");
  // Assemble an equivalent two-column layout: each item's true-domain
  // probability in its own column, the complement in the other.
  const long n = q_source.size() + q_target.size();
  ad::Mat probs(n, 2);
  std::vector<int> flags(static_cast<std::size_t>(n), 0);
  for (long i = 0; i < q_source.size(); ++i) {
    probs(i, 0) = q_source[i];
    probs(i, 1) = 1.0 - q_source[i];
  }
  for (long i = 0; i < q_target.size(); ++i) {
    const long r = q_source.size() + i;
    probs(r, 1) = q_target[i];
    probs(r, 0) = 1.0 - q_target[i];
    flags[static_cast<std::size_t>(r)] = 1;
  }
  return eval_scalar([&](ad::Graph& g) {
    return losses::domain_adversarial(g, g.constant(probs), flags);
  });
}

double skd_loss(const ad::Mat& enhanced, const ad::Mat& text_embeddings,
                const ad::Mat& image_embeddings) {
  return eval_scalar([&](ad::Graph& g) {
    return losses::skd(g, g.constant(enhanced), text_embeddings,
                       image_embeddings);
  });
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& p_tilde) {
  require(p.size() == p_tilde.size(), "kl: dimension mismatch ", p.size(),
          " vs ", p_tilde.size());
  return eval_scalar([&](ad::Graph& g) {
    return g.mean(losses::kl_rows(g, g.constant(p.transpose()),
                                  g.constant(p_tilde.transpose())));
  });
}

std::vector<int> confidence_filter(const ad::Mat& probs, double kappa) {
  require(kappa >= 0.0 && kappa <= 1.0,
          "confidence_filter: kappa must lie in [0,1], got ", kappa);
  std::vector<int> keep;
  for (int i = 0; i < probs.rows(); ++i)
    if (probs.row(i).maxCoeff() > kappa) keep.push_back(i);
  return keep;
}

int draw_omega(Rng& rng) { return rng.bernoulli(0.5) ? 1 : 0; }

double offset_refinement_loss(const ad::Mat& p, const ad::Mat& p_tilde,
                              double kappa, int omega) {
  return eval_scalar([&](ad::Graph& g) {
    return losses::offset_refinement(g, g.constant(p), g.constant(p_tilde),
                                     kappa, omega);
  });
}

ObjectiveParts total_objective(double focal, double dom, double skd,
                               double offset, double alpha, double beta,
                               double mu) {
  const auto check = [](double v, const char* name) {
    require(std::isfinite(v), "objective: non-finite ", name, " component (",
            v, ")");
  };
  check(focal, "focal");
  check(dom, "domain");
  check(skd, "distillation");
  check(offset, "offset");
  require(mu >= 0.0 && mu <= 1.0, "objective: mu must lie in [0,1], got ", mu);
  require(alpha >= 0.0 && beta >= 0.0,
          "objective: alpha and beta must be nonnegative");
  return {focal - dom + alpha * skd + mu * beta * offset, dom};
}

}  // namespace seadapt
