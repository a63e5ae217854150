// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "seadapt/graph.hpp"
#include "seadapt/rng.hpp"

namespace seadapt {

// Trade-off weights of the combined objective. gamma (offset magnitude)
// lives in PerturbationConfig.
struct LossWeights {
  double alpha = 0.3;  // distillation weight
  double beta = 1.0;   // offset-consistency weight
  double tau = 0.0;    // focal focusing strength
  double kappa = 0.4;  // confidence threshold
};

// Stabilizer used inside logs and cosine norms.
inline constexpr double kLossEpsilon = 1e-8;

// Differentiable builders. Probability inputs are row-stochastic matrices
// (one sample per row). All return column vectors (per sample) or 1x1
// scalars on the given graph.
namespace losses {

// Per-sample -log p_y, clamped at kLossEpsilon. n x 1.
ad::Var cross_entropy_rows(ad::Graph& g, ad::Var probs,
                           const std::vector<int>& labels);

// Per-sample (1 - p_y)^tau * (-log p_y). Degenerates to cross-entropy at
// tau = 0 exactly. n x 1.
ad::Var focal_rows(ad::Graph& g, ad::Var probs, const std::vector<int>& labels,
                   double tau);

// Batch mean of focal_rows. 1x1.
ad::Var focal_loss(ad::Graph& g, ad::Var probs, const std::vector<int>& labels,
                   double tau);

// -E_source[log q_source] - E_target[log q_target] over a mixed batch.
// domain_probs is n x 2 with column 0 the source probability;
// domain_of_row holds 0 (source) or 1 (target) per row. Both domains must
// be present. 1x1.
ad::Var domain_adversarial(ad::Graph& g, ad::Var domain_probs,
                           const std::vector<int>& domain_of_row);

// -mean_i[cos(enhanced_i, text_i) + cos(enhanced_i, image_i)] against
// frozen teacher rows. 1x1, range [-2, 2].
ad::Var skd(ad::Graph& g, ad::Var enhanced, const ad::Mat& text_embeddings,
            const ad::Mat& image_embeddings);

// Per-sample KL(p || q) with epsilon-stabilized ratios; gradients flow
// through both arguments. n x 1.
ad::Var kl_rows(ad::Graph& g, ad::Var p, ad::Var q);

// omega-selected, confidence-filtered symmetric consistency:
//   omega = 1: mean over {max p > kappa} of KL(p || p_tilde)
//   omega = 0: mean over {max p_tilde > kappa} of KL(p_tilde || p)
// An empty filtered set makes the term 0. 1x1.
ad::Var offset_refinement(ad::Graph& g, ad::Var p, ad::Var p_tilde,
                          double kappa, int omega);

}  // namespace losses

// Value-level API: evaluates the builders above on throwaway graphs, so
// the scalar path and the gradient path cannot drift apart.

double cross_entropy(const Eigen::VectorXd& p, int y);

Eigen::VectorXd per_sample_cross_entropy(const ad::Mat& probs,
                                         const std::vector<int>& labels);

double focal_loss(const ad::Mat& probs, const std::vector<int>& labels,
                  double tau);

// q_source / q_target: per-item probability assigned to the item's true
// domain. Either side empty is an error.
double domain_adversarial_loss(const Eigen::VectorXd& q_source,
                               const Eigen::VectorXd& q_target);

double skd_loss(const ad::Mat& enhanced, const ad::Mat& text_embeddings,
                const ad::Mat& image_embeddings);

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& p_tilde);

// Indices of rows whose max probability strictly exceeds kappa.
std::vector<int> confidence_filter(const ad::Mat& probs, double kappa);

// Bernoulli(0.5) branch selector, one draw per batch.
int draw_omega(Rng& rng);

double offset_refinement_loss(const ad::Mat& p, const ad::Mat& p_tilde,
                              double kappa, int omega);

struct ObjectiveParts {
  double loss_fc;  // focal - dom + alpha*skd + mu*beta*offset
  double loss_d;   // dom
};

// Combines per-batch component values into the reported objective pair.
// The training graph realizes the same algebra with the domain term's sign
// handled by gradient reversal. Errors name any non-finite component.
ObjectiveParts total_objective(double focal, double dom, double skd,
                               double offset, double alpha, double beta,
                               double mu);

}  // namespace seadapt
