// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "seadapt/manifest.hpp"

namespace seadapt {

// Weather weights of the prior quality score; the maximum (sunny) also
// serves as the normalizer keeping priors in [0,1].
double weather_weight(WeatherCondition w);

inline constexpr double kMaxWeatherWeight = 5.0;

// iqa * weight(weather) / 5.
double prior_score(double iqa, WeatherCondition w);

// Time-varying training schedules.
struct TrainSchedule {
  int total_epochs = 10;        // T
  int adaptive_period = 1000;   // N, iterations until mu saturates
  double growth_k = 2.0;        // k, subset growth rate
  double lambda0 = 0.5;         // starting subset proportion
  double gamma_base = 0.2;      // offset magnitude before modulation
  double beta_base = 1.0;       // offset weight before modulation

  void validate() const;
};

// lambda0 + (1 - lambda0) * (1 - exp(-k t / T)): proportion of the source
// pool trained on at epoch t. Defined for 0 <= t <= T.
double lambda_schedule(double t, const TrainSchedule& sched);

// 5 t / T: focal focusing strength ramp.
double tau_schedule(double t, double total_epochs);

// t / T: prior-to-dynamic blend weight.
double phi_schedule(double t, double total_epochs);

// sin(pi n / 2N) for n < N, else 1: iteration-level warmup scalar mu.
double adaptive_scalar(long n, long period);

struct ModulatedScalars {
  double gamma_mu;
  double beta_mu;
};

// (mu * gamma_base, mu * beta_base).
ModulatedScalars modulated_scalars(double mu, double gamma_base,
                                   double beta_base);

struct DifficultyScore {
  std::string sample_id;
  double prior = 0.0;    // weather-weighted quality, [0,1]
  double dynamic = 0.0;  // 1 - normalized CE, [0,1]
  double blended = 0.0;  // (1-phi)*prior + phi*dynamic
};

// Min-max normalizes per-sample cross-entropy over the pool. When every
// value is equal the normalization is degenerate and each entry maps to
// 0.5.
std::vector<double> normalize_ce(const std::vector<double>& pool_ce);

// (1 - phi) * prior + phi * (1 - ce_norm); ce_norm must already be pool-
// normalized into [0,1].
double difficulty_score(double prior, double ce_norm, double phi);

// Difficulty scores for a full source pool from priors and raw per-sample
// cross-entropy values (normalized internally).
std::vector<DifficultyScore> score_pool(
    const std::vector<std::string>& sample_ids,
    const std::vector<double>& priors, const std::vector<double>& pool_ce,
    double phi);

// The ceil(lambda(t) * |scores|) ids with the highest blended scores; ties
// broken by ascending sample id. Pure function of its arguments.
std::vector<std::string> select_subset(const std::vector<DifficultyScore>& scores,
                                       double t, const TrainSchedule& sched);

}  // namespace seadapt
