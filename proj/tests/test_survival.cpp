#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "bjq/buckley_james.hpp"
#include "bjq/errors.hpp"
#include "bjq/km.hpp"
#include "bjq/rng.hpp"

using namespace bjq;

namespace {

// Brute-force product-limit oracle, computed straight from the definition:
// S(u) = prod over unique event values v <= u of (1 - d_v / #{l : x_l >= v}).
struct OraclePoint {
  double value;
  double cdf;
};

std::vector<OraclePoint> km_oracle(const std::vector<double>& x, const std::vector<bool>& ev) {
  std::set<double> event_values;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (ev[i]) event_values.insert(x[i]);
  std::vector<OraclePoint> out;
  for (double v : event_values) {
    double surv = 1.0;
    for (double w : event_values) {
      if (w > v) continue;
      int at_risk = 0, deaths = 0;
      for (std::size_t l = 0; l < x.size(); ++l) {
        if (x[l] >= w) ++at_risk;
        if (ev[l] && x[l] == w) ++deaths;
      }
      surv *= 1.0 - static_cast<double>(deaths) / at_risk;
    }
    out.push_back({v, 1.0 - surv});
  }
  return out;
}

StageSample make_sample(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& times, const std::vector<bool>& events) {
  StageSample s;
  s.design.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      s.design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  s.times = Eigen::Map<const Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
  s.events = events;
  return s;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("km_estimate: all events step through 1/3, 2/3, 1") {
  const KMCurve km = km_estimate({1, 2, 3}, {true, true, true}, true);
  REQUIRE(km.jump_points.size() == 3);
  CHECK(km.jump_points == std::vector<double>{1, 2, 3});
  CHECK(km.cdf_values[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(km.cdf_values[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(km.cdf_values[2] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("km_estimate: censored middle value pushes its mass to the tail") {
  const KMCurve km = km_estimate({1, 2, 3}, {true, false, true}, true);
  REQUIRE(km.jump_points.size() == 2);
  CHECK(km.jump_points[0] == 1);
  CHECK(km.jump_points[1] == 3);
  CHECK(km.cdf_values[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(km.cdf_values[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(km.mass[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));
}

TEST_CASE("km_estimate: single event carries all mass") {
  const KMCurve km = km_estimate({0}, {true}, false);
  REQUIRE(km.jump_points.size() == 1);
  CHECK(km.jump_points[0] == 0);
  CHECK(km.cdf_values[0] == 1.0);
}

TEST_CASE("km_estimate: input errors") {
  CHECK_THROWS_AS(km_estimate({}, {}, true), validation_error);
  CHECK_THROWS_AS(km_estimate({1, 2}, {false, false}, true), no_events_error);
  CHECK_THROWS_AS(km_estimate({1, 2}, {false, false}, false), no_events_error);
}

TEST_CASE("km_estimate: tail correction turns a trailing censoring into an event") {
  const KMCurve with = km_estimate({1, 2, 4}, {true, true, false}, true);
  CHECK(with.cdf_values.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(with.jump_points.back() == 4);

  const KMCurve without = km_estimate({1, 2, 4}, {true, true, false}, false);
  CHECK(without.jump_points.back() == 2);
  CHECK(without.cdf_values.back() == doctest::Approx(2.0 / 3).epsilon(1e-15));
}

TEST_CASE("km_estimate: ties process events before censorings") {
  // Censored at 2 stays at risk for the event at 2.
  const KMCurve km = km_estimate({1, 2, 2, 3}, {true, true, false, true}, true);
  REQUIRE(km.jump_points.size() == 3);
  // S(1) = 3/4, S(2) = 3/4 * (1 - 1/3) = 1/2, S(3) = 0.
  CHECK(km.cdf_values[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(km.cdf_values[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(km.cdf_values[2] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("km_estimate matches the brute-force oracle on random tie-free inputs") {
  RngStream rng(987654321);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20);
    std::vector<double> x(n);
    std::vector<bool> ev(n);
    bool any_event = false;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-5, 5);
      ev[i] = rng.bernoulli(0.6);
      any_event = any_event || ev[i];
    }
    if (!any_event) ev[rng.uniform_index(n)] = true;

    const KMCurve km = km_estimate(x, ev, false);
    const auto oracle = km_oracle(x, ev);
    REQUIRE(km.jump_points.size() == oracle.size());
    double mass_total = 0.0;
    for (std::size_t j = 0; j < oracle.size(); ++j) {
      CHECK(km.jump_points[j] == oracle[j].value);
      CHECK(km.cdf_values[j] == doctest::Approx(oracle[j].cdf).epsilon(1e-13));
      mass_total += km.mass[j];
      CHECK(mass_total == doctest::Approx(km.cdf_values[j]).epsilon(1e-12));
    }
    km.validate();
  }
}

TEST_CASE("conditional_mean_above") {
  KMCurve km;
  km.jump_points = {-1, 0, 2};
  km.mass = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  km.cdf_values = {1.0 / 3, 2.0 / 3, 1.0};
  CHECK(conditional_mean_above(km, -0.5) == doctest::Approx(1.0).epsilon(1e-15));

  KMCurve km2;
  km2.jump_points = {1, 2, 3};
  km2.mass = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  km2.cdf_values = {1.0 / 3, 2.0 / 3, 1.0};
  CHECK(conditional_mean_above(km2, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(conditional_mean_above(km2, 5) == doctest::Approx(3.0).epsilon(1e-15));  // tail fallback
}

TEST_CASE("bj_impute: uncensored rows pass through unchanged") {
  const auto sample = make_sample({{1, 0.5}, {1, -1.0}, {1, 2.0}}, {3, 4, 5},
                                  {true, true, true});
  const Eigen::VectorXd out = bj_impute(sample, vec({1.0, 0.25}));
  CHECK(out(0) == 3);
  CHECK(out(1) == 4);
  CHECK(out(2) == 5);
}

TEST_CASE("bj_impute: censored row below the single event residual") {
  // Residuals equal the observed times (H*beta = 0): event residual 2,
  // censored residual 1, so E[T | T > 1] = 2.
  const auto sample = make_sample({{1, 1}, {1, -1}}, {2, 1}, {true, false});
  const Eigen::VectorXd out = bj_impute(sample, vec({0, 0}));
  CHECK(out(0) == 2);
  CHECK(out(1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("bj_impute: censored residual beyond all events") {
  // Censored row has the largest residual. With tail correction it becomes
  // an event in the KM curve, so the imputed value equals the observed
  // censored time; without it, the value falls back to the largest
  // uncensored residual.
  const auto sample = make_sample({{1, 0}, {1, 0}, {1, 0}}, {1, 2, 5},
                                  {true, true, false});
  const Eigen::VectorXd beta = vec({0, 0});
  const Eigen::VectorXd with = bj_impute(sample, beta, true);
  CHECK(with(2) == doctest::Approx(5.0).epsilon(1e-15));
  const Eigen::VectorXd without = bj_impute(sample, beta, false);
  CHECK(without(2) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("bj_impute: dominance under tail correction") {
  RngStream rng(13579);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(30);
    std::vector<std::vector<double>> rows;
    std::vector<double> times;
    std::vector<bool> events;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = rng.uniform(-2, 2);
      rows.push_back({1.0, z});
      times.push_back(2.0 * z + rng.normal());
      const bool e = rng.bernoulli(0.5);
      events.push_back(e);
      any = any || e;
    }
    if (!any) events[0] = true;
    const auto sample = make_sample(rows, times, events);
    const Eigen::VectorXd beta = vec({rng.normal(), rng.normal()});
    const Eigen::VectorXd imputed = bj_impute(sample, beta, true);
    for (std::size_t i = 0; i < n; ++i) {
      if (!events[i]) CHECK(imputed(static_cast<Eigen::Index>(i)) >= times[i] - 1e-10);
    }
  }
}

TEST_CASE("bj_step: no censoring reproduces OLS for any starting point") {
  RngStream rng(24680);
  const int n = 40;
  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  std::vector<bool> events(n, true);
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(-1, 3), b = rng.bernoulli(0.5) ? 1.0 : 0.0;
    rows.push_back({1.0, a, b});
    times.push_back(2.0 + 0.5 * a - 1.5 * b + rng.normal());
  }
  const auto sample = make_sample(rows, times, events);

  // Direct OLS via normal equations.
  const Eigen::MatrixXd x = sample.design;
  const Eigen::VectorXd ols =
      (x.transpose() * x).ldlt().solve(x.transpose() * sample.times);

  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd start = vec({rng.normal(), rng.normal(), rng.normal()});
    const Eigen::VectorXd stepped = bj_step(sample, start);
    CHECK((stepped - ols).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("bj_step: matches the centered estimating-equation oracle") {
  // n=5, one censored row. The oracle solves sum (H - Hbar)(Yhat(b) - H beta) = 0
  // for the slope directly and recovers the intercept from the means.
  const auto sample = make_sample(
      {{1, 0.0}, {1, 1.0}, {1, 2.0}, {1, 3.0}, {1, 4.0}},
      {1.0, 2.2, 2.8, 3.5, 4.1}, {true, true, false, true, true});
  const Eigen::VectorXd b = vec({0.9, 0.8});
  const Eigen::VectorXd yhat = bj_impute(sample, b, true);

  double zbar = 0, ybar = 0;
  for (int i = 0; i < 5; ++i) { zbar += sample.design(i, 1); ybar += yhat(i); }
  zbar /= 5; ybar /= 5;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < 5; ++i) {
    sxx += (sample.design(i, 1) - zbar) * (sample.design(i, 1) - zbar);
    sxy += (sample.design(i, 1) - zbar) * (yhat(i) - ybar);
  }
  const double slope = sxy / sxx;
  const double intercept = ybar - zbar * slope;

  const Eigen::VectorXd stepped = bj_step(sample, b);
  CHECK(stepped(0) == doctest::Approx(intercept).epsilon(1e-12));
  CHECK(stepped(1) == doctest::Approx(slope).epsilon(1e-12));

  // And the modified estimating equation is satisfied at the solution.
  double u = 0;
  for (int i = 0; i < 5; ++i)
    u += (sample.design(i, 1) - zbar) * (yhat(i) - sample.design.row(i) * stepped);
  CHECK(std::fabs(u) < 1e-10);
}

TEST_CASE("bj_step: duplicated constant column is rank deficient") {
  const auto sample = make_sample({{1, 2, 1}, {1, 2, 2}, {1, 2, 3}}, {1, 2, 3},
                                  {true, true, true});
  CHECK_THROWS_AS(bj_step(sample, vec({0, 0, 0})), rank_deficiency_error);
  try {
    bj_step(sample, vec({0, 0, 0}));
  } catch (const rank_deficiency_error& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);  // names column 1
  }
}

TEST_CASE("bj_fit: no censoring converges to OLS in one step") {
  RngStream rng(112233);
  const int n = 30;
  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  std::vector<bool> events(n, true);
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(0, 1);
    rows.push_back({1.0, a});
    times.push_back(1.0 + 2.0 * a + 0.1 * rng.normal());
  }
  const auto sample = make_sample(rows, times, events);
  const BJFit fit = bj_fit(sample);
  CHECK(fit.converged);
  CHECK(fit.iterations == 1);
  CHECK_FALSE(fit.oscillation_detected);

  const Eigen::MatrixXd x = sample.design;
  const Eigen::VectorXd ols =
      (x.transpose() * x).ldlt().solve(x.transpose() * sample.times);
  CHECK((fit.beta - ols).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("bj_fit: requires as many events as columns") {
  const auto sample = make_sample({{1, 0}, {1, 1}, {1, 2}}, {1, 2, 3},
                                  {true, false, false});
  CHECK_THROWS_AS(bj_fit(sample), no_events_error);
}

TEST_CASE("bj_fit: fixed-point residual of the estimating equation is small") {
  RngStream rng(445566);
  const int n = 200;
  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  std::vector<bool> events;
  for (int i = 0; i < n; ++i) {
    const double z = rng.uniform(-1, 3);
    const double t = 5.0 - 1.0 * z + rng.normal();
    const double c = rng.uniform(2.0, 7.5);
    rows.push_back({1.0, z});
    times.push_back(std::min(t, c));
    events.push_back(t <= c);
  }
  const auto sample = make_sample(rows, times, events);
  const BJConfig config;
  const BJFit fit = bj_fit(sample, config);
  REQUIRE(fit.converged);
  if (!fit.oscillation_detected) {
    const Eigen::VectorXd yhat = bj_impute(sample, fit.beta, config.tail_correction);
    const double zbar = sample.design.col(1).mean();
    double u = 0;
    for (int i = 0; i < n; ++i)
      u += (sample.design(i, 1) - zbar) * (yhat(i) - sample.design.row(i) * fit.beta);
    CHECK(std::fabs(u) / n < 10 * config.tolerance);
  }
}

TEST_CASE("bj_fit: shifting all times by a constant moves only the intercept") {
  RngStream rng(778899);
  const int n = 120;
  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  std::vector<bool> events;
  for (int i = 0; i < n; ++i) {
    const double z = rng.uniform(-1, 3);
    const double w = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double t = 6.0 + 0.8 * z - 0.4 * w + rng.normal();
    const double c = rng.uniform(4.0, 10.0);
    rows.push_back({1.0, z, w});
    times.push_back(std::min(t, c));
    events.push_back(t <= c);
  }
  const auto sample = make_sample(rows, times, events);
  const BJFit fit = bj_fit(sample);

  const double shift = 7.25;
  StageSample shifted = sample;
  shifted.times.array() += shift;
  const BJFit fit2 = bj_fit(shifted);

  CHECK(fit2.beta(0) - fit.beta(0) == doctest::Approx(shift).epsilon(1e-8));
  CHECK(fit2.beta(1) == doctest::Approx(fit.beta(1)).epsilon(1e-8));
  CHECK(fit2.beta(2) == doctest::Approx(fit.beta(2)).epsilon(1e-8));
  CHECK(fit.iterations == fit2.iterations);
}

TEST_CASE("bj_fit: residual KM curve is a valid distribution") {
  const auto sample = make_sample({{1, 0}, {1, 1}, {1, 2}, {1, 3}, {1, 4}},
                                  {2.0, 2.4, 3.1, 3.0, 4.2},
                                  {true, false, true, true, false});
  const BJFit fit = bj_fit(sample);
  fit.residual_km.validate();
  CHECK(fit.residual_km.cdf_values.back() == doctest::Approx(1.0).epsilon(1e-12));
}
