#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "blowuplab/specfun.hpp"
#include "blowuplab/testfam.hpp"
#include "blowuplab/wavesim.hpp"

namespace tf = blowuplab::testfam;
namespace sf = blowuplab::specfun;

namespace {

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

// closed form of phi_lambda for N = 3, from the half-integer Bessel forms:
// [sinh(lambda r) - sinh(lambda) e^{-lambda (r-1)}] / (lambda r)
double phi_closed_n3(double lambda, double r) {
  return (std::sinh(lambda * r) -
          std::sinh(lambda) * std::exp(-lambda * (r - 1.0))) /
         (lambda * r);
}

// closed form of the light-cone integral via 2F1 (independent series route)
double yz_closed(const tf::ExteriorGeometry& geom, double beta, double r,
                 double t) {
  const double z = (r / t) * (r / t);
  return std::pow(t, -beta) *
         sf::hyp2f1({0.5 * beta, 0.5 * (beta + 1.0), 0.5 * geom.dim_n, z})
             .value;
}

}  // namespace

TEST_CASE("geometry and domain types validate") {
  REQUIRE_THROWS_AS(tf::ExteriorGeometry(2, 2.0), std::domain_error);
  REQUIRE_THROWS_AS(tf::ExteriorGeometry(3, 1.0), std::domain_error);
  REQUIRE(tf::ExteriorGeometry(5, 2.0).nu == 1.5);
  REQUIRE_THROWS_AS(tf::TestFunctionParams(0.0), std::domain_error);
  REQUIRE_THROWS_AS(tf::LightConePoint(-1.0, 2.0), std::domain_error);
  REQUIRE_THROWS_AS(tf::LightConePoint(3.0, 2.0), std::domain_error);
  REQUIRE_NOTHROW(tf::LightConePoint(0.0, 2.0));
}

TEST_CASE("harmonic weight U") {
  const tf::ExteriorGeometry g3(3, 2.5);
  REQUIRE(tf::harmonic_u(g3, 1.0) == 0.0);
  REQUIRE(tf::harmonic_u(g3, 2.0) == 0.5);
  REQUIRE(tf::harmonic_u(tf::ExteriorGeometry(5, 2.0), 1e8) ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE_THROWS_AS(tf::harmonic_u(g3, 0.5), std::domain_error);
  double prev = -1.0;
  for (double r = 1.0; r < 50.0; r += 0.5) {
    const double u = tf::harmonic_u(g3, r);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(u > prev);
    prev = u;
  }
}

TEST_CASE("psi1 and psi2 against N = 3 closed forms") {
  const tf::ExteriorGeometry g3(3, 2.5);
  REQUIRE(tf::psi1(g3, 0.0) == 1.0);
  REQUIRE(rel_err(tf::psi1(g3, 1.0), std::sinh(1.0)) < 1e-13);
  REQUIRE(rel_err(tf::psi2(g3, 1.0), std::exp(-1.0)) < 1e-13);
  for (double z : {0.1, 0.7, 2.0, 11.0, 60.0}) {
    REQUIRE(rel_err(tf::psi1(g3, z), std::sinh(z) / z) < 1e-12);
    REQUIRE(rel_err(tf::psi2(g3, z), std::exp(-z) / z) < 1e-12);
  }
  REQUIRE_THROWS_AS(tf::psi1(g3, -0.1), std::domain_error);
  REQUIRE_THROWS_AS(tf::psi2(g3, 0.0), std::domain_error);
  // psi1 is nondecreasing with psi1 <= e^z, for several dimensions
  for (int n : {3, 4, 5, 8}) {
    const tf::ExteriorGeometry g(n, 2.0);
    double prev = 0.0;
    for (double z = 0.0; z < 40.0; z += 0.25) {
      const double v = tf::psi1(g, z);
      REQUIRE(v > 0.0);
      REQUIRE(v >= prev);
      REQUIRE(v <= std::exp(z) * (1.0 + 1e-12));
      prev = v;
    }
    REQUIRE(tf::psi2(g, 3.0) > 0.0);
  }
}

TEST_CASE("phi_lambda: boundary, closed form, limits") {
  const tf::ExteriorGeometry g3(3, 2.5);
  // Dirichlet boundary value
  for (double lambda : {0.1, 0.5, 1.0, 3.0}) {
    REQUIRE(std::abs(tf::phi_lambda(g3, lambda, 1.0)) <=
            1e-12 * tf::psi1(g3, lambda));
  }
  // closed form at (lambda, r) = (1, 2); value 1.5972640247326626
  REQUIRE(rel_err(tf::phi_lambda(g3, 1.0, 2.0), phi_closed_n3(1.0, 2.0)) <
          1e-12);
  REQUIRE(rel_err(phi_closed_n3(1.0, 2.0), 1.5972640247326626) < 1e-15);
  for (double lambda : {0.2, 0.9}) {
    for (double r : {1.3, 4.0, 20.0}) {
      REQUIRE(rel_err(tf::phi_lambda(g3, lambda, r),
                      phi_closed_n3(lambda, r)) < 1e-11);
    }
  }
  // sandwich lower bound at the spec's sample point
  REQUIRE(tf::phi_lambda(g3, 0.5, 3.0) >=
          tf::harmonic_u(g3, 3.0) * tf::psi1(g3, 1.5));
  // lambda -> 0 recovers U, verified at lambda = 1e-4 to 1e-3 absolute
  for (int n : {3, 4, 5}) {
    const tf::ExteriorGeometry g(n, 2.5);
    for (double r : {1.0, 1.5, 3.0, 10.0}) {
      REQUIRE(std::abs(tf::phi_lambda(g, 1e-4, r) - tf::harmonic_u(g, r)) <
              1e-3);
    }
  }
  REQUIRE_THROWS_AS(tf::phi_lambda(g3, 0.0, 2.0), std::domain_error);
  REQUIRE_THROWS_AS(tf::phi_lambda(g3, 1.0, 0.9), std::domain_error);
}

TEST_CASE("phi_lambda sandwich over a (lambda, r) sample") {
  for (int n : {3, 4, 6}) {
    const tf::ExteriorGeometry g(n, 2.5);
    double ratio_sup = 0.0;
    for (double lambda = 0.05; lambda <= 1.0; lambda += 0.05) {
      for (double r = 1.0 + 1e-6; r <= 100.0; r *= 1.45) {
        const double lower = tf::harmonic_u(g, r) * tf::psi1(g, lambda * r);
        const double phi = tf::phi_lambda(g, lambda, r);
        REQUIRE(phi >= lower - 1e-12 * (1.0 + lower));
        if (lower > 0.0) ratio_sup = std::max(ratio_sup, phi / lower);
      }
    }
    // the upper-bound constant exists and is finite; record it
    REQUIRE(ratio_sup < 100.0);
    INFO("N=" << n << " empirical C_nu = " << ratio_sup);
    REQUIRE(ratio_sup >= 1.0);
  }
}

TEST_CASE("eigen-equation residual vanishes at second order") {
  const tf::ExteriorGeometry g3(3, 2.5);
  const tf::ExteriorGeometry g4(4, 2.5);
  REQUIRE(tf::verify_eigen_equation(g3, 1.0, 2.0, 1e-3) <= 1e-5);
  REQUIRE(tf::verify_eigen_equation(g4, 0.5, 1.5, 1e-3) <= 1e-5);
  const double r1 = tf::verify_eigen_equation(g3, 1.0, 2.0, 2e-3);
  const double r2 = tf::verify_eigen_equation(g3, 1.0, 2.0, 1e-3);
  REQUIRE(r1 / r2 >= 3.5);
  REQUIRE_THROWS_AS(tf::verify_eigen_equation(g3, 1.0, 1.001, 1e-3),
                    std::domain_error);
}

TEST_CASE("phi_beta: boundary, large-time limit, bounds") {
  const tf::ExteriorGeometry g3(3, 2.5);
  // boundary: the integrand vanishes identically at r = 1
  {
    tf::TestFunctionParams params(1.0);
    const auto v = tf::phi_beta(g3, params, tf::LightConePoint(1.0, 5.0));
    REQUIRE(std::abs(v.value) <= params.quad_tolerance);
  }
  // large-time limit: t^beta Phi_beta -> U
  {
    tf::TestFunctionParams params(1.0);
    const auto v = tf::phi_beta(g3, params, tf::LightConePoint(2.0, 1e4));
    REQUIRE(std::abs(1e4 * v.value - 0.5) < 1e-2);
  }
  // two-sided bound at (N=3, beta=2, r=2, t=10)
  {
    tf::TestFunctionParams params(2.0);
    const double u = tf::harmonic_u(g3, 2.0);
    const double t = 10.0;
    const auto v = tf::phi_beta(g3, params, tf::LightConePoint(2.0, t));
    const double lower =
        sf::lower_gamma_regularized(2.0, 1.0) * u * std::pow(t, -2.0);
    // empirical upper constant over the lambda sample in (0,1]
    double c_emp = 0.0;
    for (double lambda = 0.02; lambda <= 1.0; lambda += 0.02)
      for (double r = 1.0 + 1e-7; r <= 40.0; r *= 1.3)
        c_emp = std::max(c_emp, tf::phi_lambda(g3, lambda, r) /
                                    (tf::harmonic_u(g3, r) *
                                     tf::psi1(g3, lambda * r)));
    const double fval = sf::hyp2f1({1.0, 1.5, 1.5, 0.04}).value;
    REQUIRE(v.value >= lower * (1.0 - 1e-9));
    REQUIRE(v.value <= 1.02 * c_emp * u * std::pow(t, -2.0) * fval);
  }
  // quadrature budget exhaustion surfaces as AccuracyError with a partial
  {
    tf::TestFunctionParams params(1.0);
    params.quad_tolerance = 1e-15;
    params.quad_max_subdivisions = 1;
    REQUIRE_THROWS_AS(tf::phi_beta(g3, params, tf::LightConePoint(2.0, 1e4)),
                      tf::AccuracyError);
  }
  REQUIRE_THROWS_AS(tf::phi_beta(g3, tf::TestFunctionParams(1.0),
                                 tf::LightConePoint(0.5, 5.0)),
                    std::domain_error);
}

TEST_CASE("light-cone integral equals the hypergeometric closed form") {
  // dual route: adaptive Laplace-type quadrature vs the 2F1 series
  for (int n : {3, 4, 5}) {
    const tf::ExteriorGeometry g(n, 2.5);
    for (double beta : {0.5, 1.0, 2.0, n - 1.0}) {
      for (double ratio : {0.0, 0.3, 0.7, 0.9}) {
        const double t = 4.0;
        const double r = ratio * t;
        const auto v = tf::yz_integral(g, beta, tf::LightConePoint(r, t));
        REQUIRE(rel_err(v.value, yz_closed(g, beta, r, t)) < 1e-6);
      }
    }
  }
  // beta = 1, r -> 0 reduces to the Laplace transform of 1: exactly 1/t
  {
    const tf::ExteriorGeometry g3(3, 2.5);
    const auto v = tf::yz_integral(g3, 1.0, tf::LightConePoint(0.0, 7.0));
    REQUIRE(rel_err(v.value, 1.0 / 7.0) < 1e-10);
  }
  // spot value: (N=4, beta=3, r/t=0.7) matches t^{-3} F(1.5,2,2;0.49) =
  // t^{-3} (0.51)^{-1.5}
  {
    const tf::ExteriorGeometry g4(4, 2.5);
    const double t = 2.0;
    const auto v = tf::yz_integral(g4, 3.0, tf::LightConePoint(1.4, t));
    const double closed = std::pow(t, -3.0) * std::pow(0.51, -1.5);
    REQUIRE(rel_err(v.value, closed) < 1e-6);
  }
}

TEST_CASE("light-cone integral scale covariance") {
  const tf::ExteriorGeometry g4(4, 2.5);
  for (double s : {2.0, 5.0}) {
    for (double beta : {0.5, 2.0}) {
      const double r = 1.1, t = 3.0;
      const auto base = tf::yz_integral(g4, beta, tf::LightConePoint(r, t));
      const auto scaled =
          tf::yz_integral(g4, beta, tf::LightConePoint(s * r, s * t));
      REQUIRE(rel_err(std::pow(s, beta) * scaled.value, base.value) < 1e-8);
    }
  }
}

TEST_CASE("shifted family") {
  const tf::ExteriorGeometry g3(3, 2.5);
  // exact consistency with the definition
  {
    tf::TestFunctionParams params(2.0, 20.0);
    const double direct =
        std::pow(20.0, 2.0) *
        tf::phi_beta(g3, params, tf::LightConePoint(3.0, 25.0)).value;
    REQUIRE(tf::shifted_phi(g3, params, 3.0, 5.0) == direct);
  }
  // boundary
  {
    tf::TestFunctionParams params(1.5, 10.0);
    REQUIRE(std::abs(tf::shifted_phi(g3, params, 1.0, 2.0)) <
            params.quad_tolerance * std::pow(10.0, 1.5) * 2.0);
  }
  // large-shift limit tends to U
  {
    tf::TestFunctionParams params(1.0, 1e4);
    REQUIRE(std::abs(tf::shifted_phi(g3, params, 2.0, 0.0) - 0.5) < 1e-2);
  }
  REQUIRE_THROWS_AS(
      tf::shifted_phi(g3, tf::TestFunctionParams(1.0, 2.0), 5.0, 1.0),
      std::domain_error);
}

TEST_CASE("time-derivative relation d/dt Phi_beta = -beta Phi_{beta+1}") {
  const tf::ExteriorGeometry g3(3, 2.5);
  const tf::ExteriorGeometry g4(4, 2.5);
  {
    tf::TestFunctionParams params(1.0);
    REQUIRE(tf::dt_relation_check(g3, params, tf::LightConePoint(2.0, 10.0),
                                  1e-2) <= 1e-6);
  }
  {
    tf::TestFunctionParams params(3.0);
    REQUIRE(tf::dt_relation_check(g4, params, tf::LightConePoint(1.5, 8.0),
                                  1e-2) <= 1e-6);
  }
  {  // the beta < 1 substitution route
    tf::TestFunctionParams params(0.5);
    REQUIRE(tf::dt_relation_check(g3, params, tf::LightConePoint(2.0, 10.0),
                                  1e-2) <= 1e-6);
  }
  // second-order decay in h
  {
    tf::TestFunctionParams params(1.0);
    params.quad_tolerance = 1e-12;
    const tf::LightConePoint pt(2.0, 10.0);
    const double res1 = tf::dt_relation_check(g3, params, pt, 0.2);
    const double res2 = tf::dt_relation_check(g3, params, pt, 0.1);
    REQUIRE(res1 / res2 >= 3.5);
  }
}

TEST_CASE("t_shift selection") {
  const tf::ExteriorGeometry g3(3, 2.5);
  auto zero = [](double) { return 0.0; };
  auto bump = blowuplab::wavesim::make_bump(1.5, 2.5, 1.0);
  tf::TestFunctionParams params(2.0);

  const double gU = tf::weighted_data_integral(g3, bump);
  REQUIRE(gU > 0.0);

  const double ts = tf::select_t_shift(g3, params, zero, bump);
  REQUIRE(ts > g3.support_radius_r0);
  tf::TestFunctionParams chosen(params.beta, ts);
  const double i_beta = tf::initial_functional(g3, chosen, zero, bump);
  REQUIRE(i_beta >= 0.5 * gU);

  // linearity in g: doubling g doubles I_beta, same shift still acceptable
  auto bump2 = blowuplab::wavesim::make_bump(1.5, 2.5, 2.0);
  const double i_beta2 = tf::initial_functional(g3, chosen, zero, bump2);
  REQUIRE(rel_err(i_beta2, 2.0 * i_beta) < 1e-9);

  // negative-mass data is rejected
  auto neg = blowuplab::wavesim::make_bump(1.5, 2.5, -1.0);
  REQUIRE_THROWS_AS(tf::select_t_shift(g3, params, zero, neg),
                    std::domain_error);
}

TEST_CASE("initial functional agrees with an independent fine quadrature") {
  const tf::ExteriorGeometry g3(3, 2.5);
  auto zero = [](double) { return 0.0; };
  auto bump = blowuplab::wavesim::make_bump(1.5, 2.5, 1.0);
  tf::TestFunctionParams params(2.0, 10.0);
  const double i_beta = tf::initial_functional(g3, params, zero, bump);

  // oracle: composite Simpson with 2^12 cells over the support
  const int cells = 4096;
  const double a = 1.5, b = 2.5;
  const double h = (b - a) / cells;
  double sum = 0.0;
  for (int i = 0; i <= cells; ++i) {
    const double r = a + i * h;
    const double w = (i == 0 || i == cells) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * bump(r) * tf::shifted_phi(g3, params, r, 0.0) * r * r;
  }
  const double oracle = tf::sphere_area(3) * sum * h / 3.0;
  REQUIRE(rel_err(i_beta, oracle) < 1e-8);
}
