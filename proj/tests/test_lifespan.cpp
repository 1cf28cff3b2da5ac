#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "blowuplab/lifespan.hpp"

namespace ls = blowuplab::lifespan;
namespace ws = blowuplab::wavesim;
namespace tf = blowuplab::testfam;

namespace {

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

}  // namespace

TEST_CASE("gamma(N,p) values") {
  REQUIRE(ls::gamma_np(3, 2.0) == 2.0);
  REQUIRE(std::abs(ls::gamma_np(4, 2.0)) < 1e-12);
  REQUIRE(std::abs(ls::gamma_np(3, 1.0 + std::sqrt(2.0))) < 1e-12);
  REQUIRE_THROWS_AS(ls::gamma_np(2, 2.0), std::domain_error);
  REQUIRE_THROWS_AS(ls::gamma_np(3, 1.0), std::domain_error);
}

TEST_CASE("Strauss exponent") {
  REQUIRE(rel_err(ls::strauss_exponent(3), 1.0 + std::sqrt(2.0)) < 1e-14);
  REQUIRE(rel_err(ls::strauss_exponent(4), 2.0) < 1e-14);
  // N = 5: positive root of 4 p^2 - 6 p - 2 = 0, i.e. (3 + sqrt(17))/4
  REQUIRE(rel_err(ls::strauss_exponent(5), (3.0 + std::sqrt(17.0)) / 4.0) <
          1e-14);
  REQUIRE(rel_err(ls::strauss_exponent(5), 1.7807764064044151) < 1e-12);
  for (int n = 3; n <= 10; ++n)
    REQUIRE(std::abs(ls::gamma_np(n, ls::strauss_exponent(n))) <= 1e-12);
}

TEST_CASE("critical beta") {
  REQUIRE(rel_err(ls::beta_critical(4, 2.0), 1.0) < 1e-14);
  REQUIRE(rel_err(ls::beta_critical(3, 1.0 + std::sqrt(2.0)),
                  2.0 - std::sqrt(2.0)) < 1e-12);
  // p != p_S(N): the two expressions disagree and signal non-criticality
  REQUIRE_THROWS_AS(ls::beta_critical(3, 2.0), std::domain_error);
}

TEST_CASE("predicted lifespan exponent") {
  REQUIRE(rel_err(ls::predicted_exponent(3, 2.0), 2.0) < 1e-14);
  REQUIRE(rel_err(ls::predicted_exponent(4, 1.5), 1.5 / 2.75) < 1e-14);
  REQUIRE_THROWS_AS(ls::predicted_exponent(4, 2.0), std::domain_error);
  REQUIRE_THROWS_AS(ls::predicted_exponent(3, 3.0), std::domain_error);
  // positive and increasing in p below criticality
  for (int n : {3, 4, 5}) {
    double prev = 0.0;
    const double ps = ls::strauss_exponent(n);
    for (double p = 1.05; p < ps - 0.05; p += 0.05) {
      const double e = ls::predicted_exponent(n, p);
      REQUIRE(e > 0.0);
      REQUIRE(e > prev);
      prev = e;
    }
  }
}

namespace {

ls::LifespanRecord synthetic_record(double eps, double t) {
  ls::LifespanRecord rec;
  rec.epsilon = eps;
  rec.t_num = t;
  rec.finite_lifespan = true;
  rec.converged = true;
  rec.dr = 0.01;
  rec.dt = 0.0045;
  rec.threshold = 1e6;
  return rec;
}

}  // namespace

TEST_CASE("fit on exact synthetic records") {
  std::vector<ls::LifespanRecord> records;
  for (double e : {0.4, 0.3, 0.2, 0.15, 0.1})
    records.push_back(synthetic_record(e, 7.0 * std::pow(e, -2.0)));
  const auto fit = ls::fit_subcritical(records, 3, 2.0);
  REQUIRE(std::abs(fit.slope + 2.0) < 1e-12);
  REQUIRE(rel_err(std::exp(fit.intercept), 7.0) < 1e-12);
  REQUIRE(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(fit.predicted_slope == -2.0);
  REQUIRE(fit.n_points == 5);
}

TEST_CASE("fit tolerates multiplicative noise") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  std::vector<ls::LifespanRecord> records;
  for (double e : {0.4, 0.32, 0.25, 0.2, 0.16, 0.125, 0.1})
    records.push_back(
        synthetic_record(e, 7.0 * std::pow(e, -2.0) * (1.0 + noise(rng))));
  const auto fit = ls::fit_subcritical(records, 3, 2.0);
  REQUIRE(std::abs(fit.slope + 2.0) < 0.15);
}

TEST_CASE("fit invariances and failure modes") {
  std::vector<ls::LifespanRecord> records;
  for (double e : {0.4, 0.2, 0.1, 0.05})
    records.push_back(synthetic_record(e, 3.0 * std::pow(e, -1.5)));
  const auto fit = ls::fit_subcritical(records, 3, 2.0);

  // reordering the records leaves the fit unchanged
  auto shuffled = records;
  std::swap(shuffled[0], shuffled[3]);
  std::swap(shuffled[1], shuffled[2]);
  const auto fit2 = ls::fit_subcritical(shuffled, 3, 2.0);
  REQUIRE(fit.slope == fit2.slope);
  REQUIRE(fit.intercept == fit2.intercept);

  // rescaling time units shifts only the intercept
  auto scaled = records;
  for (auto& rec : scaled) rec.t_num *= 60.0;
  const auto fit3 = ls::fit_subcritical(scaled, 3, 2.0);
  REQUIRE(std::abs(fit3.slope - fit.slope) < 1e-12);
  REQUIRE(std::abs(fit3.intercept - (fit.intercept + std::log(60.0))) < 1e-12);

  // fewer than 3 usable records is an error
  std::vector<ls::LifespanRecord> two(records.begin(), records.begin() + 2);
  REQUIRE_THROWS_AS(ls::fit_subcritical(two, 3, 2.0), std::runtime_error);
  // non-converged records do not count as usable
  auto tainted = records;
  for (auto& rec : tainted) rec.converged = false;
  tainted[0].converged = true;
  tainted[1].converged = true;
  REQUIRE_THROWS_AS(ls::fit_subcritical(tainted, 3, 2.0), std::runtime_error);
}

TEST_CASE("sweep produces per-eps records deterministically") {
  const tf::ExteriorGeometry g3(3, 2.5);
  ws::InitialData data{[](double) { return 0.0; },
                       ws::make_bump(1.5, 2.5, 8.0), 1.0, 1.5, 2.5};
  ws::SolverConfig config{2.0, 0.45, 1e6, 60.0};
  ls::SweepSettings settings;
  settings.epsilons = {0.6, 0.5, 0.4, 0.4};
  settings.dr = 0.04;
  settings.bootstrap_horizon = 60.0;
  settings.jobs = 2;

  const auto records = ls::sweep(g3, data, config, settings);
  REQUIRE(records.size() == 4);
  for (size_t i = 0; i < records.size(); ++i) {
    REQUIRE(records[i].epsilon == settings.epsilons[i]);
    REQUIRE(records[i].finite_lifespan);
    REQUIRE(records[i].converged);
    REQUIRE(records[i].error.empty());
    REQUIRE(records[i].dt == Catch::Approx(records[i].dr * 0.45));
  }
  // duplicate eps values give identical lifespans (deterministic solver)
  REQUIRE(records[2].t_num == records[3].t_num);
  // decreasing eps gives nondecreasing lifespans on this clean ladder
  REQUIRE(records[0].t_num <= records[1].t_num);
  REQUIRE(records[1].t_num <= records[2].t_num);
  // rerunning the sweep reproduces the records exactly
  const auto again = ls::sweep(g3, data, config, settings);
  for (size_t i = 0; i < records.size(); ++i)
    REQUIRE(records[i].t_num == again[i].t_num);
}

TEST_CASE("sweep attaches per-run failures without aborting") {
  const tf::ExteriorGeometry g3(3, 2.5);
  ws::InitialData data{[](double) { return 0.0; },
                       ws::make_bump(1.5, 2.5, 8.0), 1.0, 1.5, 2.5};
  // cfl out of range: every run fails, but the sweep itself returns
  ws::SolverConfig config{2.0, 1.5, 1e6, 20.0};
  ls::SweepSettings settings;
  settings.epsilons = {0.5, 0.4, 0.3};
  settings.dr = 0.05;
  const auto records = ls::sweep(g3, data, config, settings);
  REQUIRE(records.size() == 3);
  for (const auto& rec : records) {
    REQUIRE_FALSE(rec.error.empty());
    REQUIRE_FALSE(rec.converged);
  }
  REQUIRE_THROWS_AS(ls::fit_subcritical(records, 3, 2.0), std::runtime_error);
}
