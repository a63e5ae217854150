// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seadapt/common.hpp"

namespace seadapt {

double weather_weight(WeatherCondition w) {
  switch (w) {
    case WeatherCondition::sunny: return 5.0;
    case WeatherCondition::sunset_night: return 4.5;
    case WeatherCondition::cloudy: return 4.0;
    case WeatherCondition::foggy: return 3.5;
    case WeatherCondition::rainstorm: return 3.0;
  }
  fail("invalid WeatherCondition value");
}

double prior_score(double iqa, WeatherCondition w) {
  require(iqa >= 0.0 && iqa <= 1.0, "prior_score: iqa must lie in [0,1], got ",
          iqa);
  return iqa * weather_weight(w) / kMaxWeatherWeight;
}

void TrainSchedule::validate() const {
  require(total_epochs > 0, "schedule: total_epochs must be positive");
  require(adaptive_period > 0, "schedule: adaptive_period must be positive");
  require(growth_k > 0.0, "schedule: growth rate must be positive");
  require(lambda0 > 0.0 && lambda0 <= 1.0,
          "schedule: lambda0 must lie in (0,1], got ", lambda0);
  require(gamma_base >= 0.0 && gamma_base <= 1.0,
          "schedule: gamma_base must lie in [0,1], got ", gamma_base);
  require(beta_base >= 0.0, "schedule: beta_base must be nonnegative");
}

double lambda_schedule(double t, const TrainSchedule& sched) {
  sched.validate();
  require(t >= 0.0 && t <= sched.total_epochs,
          "lambda_schedule: epoch ", t, " outside [0,", sched.total_epochs,
          "]");
  const double progress = t / static_cast<double>(sched.total_epochs);
  return sched.lambda0 +
         (1.0 - sched.lambda0) * (1.0 - std::exp(-sched.growth_k * progress));
}

double tau_schedule(double t, double total_epochs) {
  require(total_epochs > 0.0, "tau_schedule: total epochs must be positive");
  require(t >= 0.0 && t <= total_epochs, "tau_schedule: epoch ", t,
          " outside [0,", total_epochs, "]");
  return 5.0 * t / total_epochs;
}

double phi_schedule(double t, double total_epochs) {
  require(total_epochs > 0.0, "phi_schedule: total epochs must be positive");
  require(t >= 0.0 && t <= total_epochs, "phi_schedule: epoch ", t,
          " outside [0,", total_epochs, "]");
  return t / total_epochs;
}

double adaptive_scalar(long n, long period) {
  require(n >= 0, "adaptive_scalar: iteration must be nonnegative, got ", n);
  require(period > 0, "adaptive_scalar: period must be positive, got ",
          period);
  if (n >= period) return 1.0;
  return std::sin(std::numbers::pi * static_cast<double>(n) /
                  (2.0 * static_cast<double>(period)));
}

ModulatedScalars modulated_scalars(double mu, double gamma_base,
                                   double beta_base) {
  require(mu >= 0.0 && mu <= 1.0, "modulated_scalars: mu must lie in [0,1]");
  return {mu * gamma_base, mu * beta_base};
}

std::vector<double> normalize_ce(const std::vector<double>& pool_ce) {
  require(!pool_ce.empty(), "normalize_ce: empty pool");
  const auto [lo_it, hi_it] =
      std::minmax_element(pool_ce.begin(), pool_ce.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(pool_ce.size());
  if (hi - lo < 1e-12) {
    // Degenerate pool: every sample equally hard.
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < pool_ce.size(); ++i)
    out[i] = (pool_ce[i] - lo) / (hi - lo);
  return out;
}

double difficulty_score(double prior, double ce_norm, double phi) {
  require(phi >= 0.0 && phi <= 1.0, "difficulty_score: phi must lie in [0,1]");
  require(prior >= 0.0 && prior <= 1.0,
          "difficulty_score: prior must lie in [0,1], got ", prior);
  require(ce_norm >= 0.0 && ce_norm <= 1.0,
          "difficulty_score: ce_norm must lie in [0,1], got ", ce_norm);
  return (1.0 - phi) * prior + phi * (1.0 - ce_norm);
}

std::vector<DifficultyScore> score_pool(
    const std::vector<std::string>& sample_ids,
    const std::vector<double>& priors, const std::vector<double>& pool_ce,
    double phi) {
  require(!sample_ids.empty(), "score_pool: empty pool");
  require(sample_ids.size() == priors.size() &&
              sample_ids.size() == pool_ce.size(),
          "score_pool: mismatched lengths (", sample_ids.size(), " ids, ",
          priors.size(), " priors, ", pool_ce.size(), " losses)");
  const std::vector<double> ce_norm = normalize_ce(pool_ce);
  std::vector<DifficultyScore> out(sample_ids.size());
  for (std::size_t i = 0; i < sample_ids.size(); ++i) {
    out[i].sample_id = sample_ids[i];
    out[i].prior = priors[i];
    out[i].dynamic = 1.0 - ce_norm[i];
    out[i].blended = difficulty_score(priors[i], ce_norm[i], phi);
  }
  return out;
}

std::vector<std::string> select_subset(
    const std::vector<DifficultyScore>& scores, double t,
    const TrainSchedule& sched) {
  require(!scores.empty(), "select_subset: empty score list");
  const double lambda = lambda_schedule(t, sched);
  const auto count = static_cast<std::size_t>(
      std::ceil(lambda * static_cast<double>(scores.size())));

  std::vector<const DifficultyScore*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const DifficultyScore* a, const DifficultyScore* b) {
              if (a->blended != b->blended) return a->blended > b->blended;
              return a->sample_id < b->sample_id;
            });

  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count && i < order.size(); ++i)
    ids.push_back(order[i]->sample_id);
  return ids;
}

}  // namespace seadapt
