// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "seadapt/common.hpp"
#include "seadapt/curriculum.hpp"
#include "test_support.hpp"

using namespace seadapt;

TEST_CASE("weather weights follow the fixed ladder") {
  CHECK(weather_weight(WeatherCondition::sunny) == 5.0);
  CHECK(weather_weight(WeatherCondition::sunset_night) == 4.5);
  CHECK(weather_weight(WeatherCondition::cloudy) == 4.0);
  CHECK(weather_weight(WeatherCondition::foggy) == 3.5);
  CHECK(weather_weight(WeatherCondition::rainstorm) == 3.0);
}

TEST_CASE("prior score is quality times normalized weather weight") {
  CHECK(prior_score(0.8, WeatherCondition::sunny) == doctest::Approx(0.8));
  CHECK(prior_score(0.8, WeatherCondition::rainstorm) == doctest::Approx(0.48));
  CHECK(prior_score(1.0, WeatherCondition::foggy) == doctest::Approx(0.7));
  CHECK(prior_score(0.0, WeatherCondition::sunny) == 0.0);
  CHECK_THROWS_AS(prior_score(1.2, WeatherCondition::sunny), Error);
  CHECK_THROWS_AS(prior_score(-0.1, WeatherCondition::sunny), Error);
}

TEST_CASE("prior score never leaves the unit interval") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double q = rng.uniform();
    for (const WeatherCondition w : all_weather_conditions()) {
      const double s = prior_score(q, w);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("lambda schedule hits its endpoints") {
  TrainSchedule sched;
  sched.total_epochs = 10;
  sched.lambda0 = 0.5;
  sched.growth_k = 2.0;
  CHECK(lambda_schedule(0.0, sched) == 0.5);
  // 0.5 + 0.5 * (1 - e^-2) = 0.9323323...
  CHECK(lambda_schedule(10.0, sched) ==
        doctest::Approx(0.9323323583816936).epsilon(1e-9));
  // Monotone nondecreasing.
  double prev = 0.0;
  for (int t = 0; t <= 10; ++t) {
    const double l = lambda_schedule(t, sched);
    CHECK(l >= prev);
    CHECK(l <= 1.0);
    prev = l;
  }
}

TEST_CASE("tau and phi ramps are linear in epoch") {
  CHECK(tau_schedule(0, 10) == 0.0);
  CHECK(tau_schedule(10, 10) == 5.0);
  CHECK(tau_schedule(5, 10) == doctest::Approx(2.5));
  CHECK(phi_schedule(0, 10) == 0.0);
  CHECK(phi_schedule(10, 10) == 1.0);
  CHECK(phi_schedule(3, 10) == doctest::Approx(0.3));
}

TEST_CASE("adaptive scalar is a quarter sine that saturates") {
  CHECK(adaptive_scalar(0, 1000) == 0.0);
  CHECK(adaptive_scalar(500, 1000) ==
        doctest::Approx(0.7071067811865475).epsilon(1e-9));
  CHECK(adaptive_scalar(1000, 1000) == 1.0);
  CHECK(adaptive_scalar(5000, 1000) == 1.0);
  // Monotone on the ramp.
  double prev = -1.0;
  for (long n = 0; n <= 1000; n += 50) {
    const double mu = adaptive_scalar(n, 1000);
    CHECK(mu >= prev);
    CHECK(mu >= 0.0);
    CHECK(mu <= 1.0);
    prev = mu;
  }
}

TEST_CASE("modulated scalars scale both offset knobs") {
  const ModulatedScalars a = modulated_scalars(1.0, 0.2, 1.0);
  CHECK(a.gamma_mu == doctest::Approx(0.2));
  CHECK(a.beta_mu == doctest::Approx(1.0));
  const ModulatedScalars b = modulated_scalars(0.5, 0.2, 1.0);
  CHECK(b.gamma_mu == doctest::Approx(0.1));
  CHECK(b.beta_mu == doctest::Approx(0.5));
  const ModulatedScalars c = modulated_scalars(0.0, 0.2, 1.0);
  CHECK(c.gamma_mu == 0.0);
  CHECK(c.beta_mu == 0.0);
}

TEST_CASE("difficulty blends prior and dynamic by phi") {
  // prior 0.8, ce_norm 0.4, phi 0.5: 0.5*0.8 + 0.5*0.6 = 0.70.
  CHECK(difficulty_score(0.8, 0.4, 0.5) == doctest::Approx(0.70).epsilon(1e-12));
  CHECK(difficulty_score(0.8, 0.4, 0.0) == doctest::Approx(0.8));
  CHECK(difficulty_score(0.8, 0.4, 1.0) == doctest::Approx(0.6));
}

TEST_CASE("ce normalization is min-max with a degenerate fallback") {
  const std::vector<double> ce{2.0, 0.0, 1.0};
  const auto norm = normalize_ce(ce);
  CHECK(norm[0] == doctest::Approx(1.0));
  CHECK(norm[1] == doctest::Approx(0.0));
  CHECK(norm[2] == doctest::Approx(0.5));

  const auto flat = normalize_ce({0.7, 0.7, 0.7});
  for (const double v : flat) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("score_pool composes priors, normalized ce and phi") {
  const std::vector<std::string> ids{"a", "b"};
  const std::vector<double> priors{0.9, 0.3};
  const std::vector<double> ce{0.0, 2.0};
  const auto scores = score_pool(ids, priors, ce, 0.5);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].sample_id == "a");
  CHECK(scores[0].prior == doctest::Approx(0.9));
  CHECK(scores[0].dynamic == doctest::Approx(1.0));  // lowest ce: easiest
  CHECK(scores[0].blended == doctest::Approx(0.95));
  CHECK(scores[1].dynamic == doctest::Approx(0.0));
  CHECK(scores[1].blended == doctest::Approx(0.15));
}

TEST_CASE("select_subset takes the ceil(lambda n) easiest with id ties") {
  TrainSchedule sched;
  sched.total_epochs = 10;
  sched.lambda0 = 0.5;
  sched.growth_k = 2.0;

  std::vector<DifficultyScore> scores;
  for (int i = 0; i < 5; ++i) {
    DifficultyScore s;
    s.sample_id = "s" + std::to_string(i);
    s.blended = 0.1 * i;  // s4 easiest
    scores.push_back(s);
  }
  // t=0: lambda=0.5, ceil(0.5*5)=3 -> the three highest blended scores.
  const auto picked = select_subset(scores, 0, sched);
  CHECK(picked == std::vector<std::string>{"s4", "s3", "s2"});

  // All blended equal: ties resolve by ascending id.
  for (auto& s : scores) s.blended = 0.5;
  const auto tied = select_subset(scores, 0, sched);
  CHECK(tied == std::vector<std::string>{"s0", "s1", "s2"});
}

TEST_CASE("select_subset matches a sort-and-cut oracle on random pools") {
  TrainSchedule sched;
  sched.total_epochs = 10;
  sched.lambda0 = 0.5;
  sched.growth_k = 2.0;

  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + rng.uniform_int(20);
    std::vector<DifficultyScore> scores;
    for (int i = 0; i < n; ++i) {
      DifficultyScore s;
      s.sample_id = "id" + std::to_string(i);
      // Coarse grid so ties happen often.
      s.blended = 0.25 * rng.uniform_int(5);
      scores.push_back(s);
    }
    for (int t = 0; t <= 10; ++t) {
      const auto got = select_subset(scores, t, sched);

      auto oracle = scores;
      std::sort(oracle.begin(), oracle.end(),
                [](const DifficultyScore& a, const DifficultyScore& b) {
                  if (a.blended != b.blended) return a.blended > b.blended;
                  return a.sample_id < b.sample_id;
                });
      const auto want = static_cast<std::size_t>(std::ceil(
          lambda_schedule(t, sched) * static_cast<double>(n)));
      std::vector<std::string> expect;
      for (std::size_t i = 0; i < std::min(want, oracle.size()); ++i)
        expect.push_back(oracle[i].sample_id);

      CHECK(got == expect);
    }
  }
}

TEST_CASE("schedule validation rejects degenerate shapes") {
  TrainSchedule bad;
  bad.total_epochs = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  TrainSchedule bad2;
  bad2.lambda0 = 1.5;
  CHECK_THROWS_AS(bad2.validate(), Error);

  TrainSchedule bad3;
  bad3.adaptive_period = 0;
  CHECK_THROWS_AS(bad3.validate(), Error);

  TrainSchedule ok;
  CHECK_NOTHROW(ok.validate());
}
