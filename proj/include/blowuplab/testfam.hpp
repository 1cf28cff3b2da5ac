#pragma once

// Weight-function family for the exterior of the unit ball: the harmonic
// weight U, the radial fundamental pair psi1/psi2 of psi'' + (N-1)/r psi' =
// psi, the Dirichlet eigenfunctions phi_lambda, the polynomially decaying
// wave solutions Phi_beta obtained by averaging e^{-lambda t} phi_lambda
// over lambda, and the shifted family used by the blowup functionals.
//
// psi2 is the decaying fundamental solution z^{-nu} K_nu(z), normalized so
// that z^{2 nu} psi2(z) -> 1 as z -> 0 (mirroring psi1(0) = 1). phi_lambda
// uses the normalization-free coefficient psi1(lambda)/psi2(lambda), which
// makes the Dirichlet property phi_lambda(1) = 0 exact by construction.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "blowuplab/quadrature.hpp"
#include "blowuplab/specfun.hpp"

namespace blowuplab::testfam {

using specfun::AccuracyError;
using specfun::EvalResult;

/// Exterior of the unit ball in dimension N >= 3; fixes nu = (N-2)/2 and the
/// radius r0 > 1 enclosing the data support.
struct ExteriorGeometry {
  int dim_n;
  double nu;
  double support_radius_r0;
  ExteriorGeometry(int n, double r0)
      : dim_n(n), nu(0.5 * (n - 2)), support_radius_r0(r0) {
    if (n < 3) throw std::domain_error("ExteriorGeometry: dimension must be >= 3");
    if (!(r0 > 1.0))
      throw std::domain_error("ExteriorGeometry: support radius must exceed 1");
  }
};

/// Parameters of Phi_beta and its shifted variant.
struct TestFunctionParams {
  double beta;
  double t_shift = 1.0;
  double quad_tolerance = 1e-10;
  int quad_max_subdivisions = 2000;
  explicit TestFunctionParams(double beta_, double t_shift_ = 1.0)
      : beta(beta_), t_shift(t_shift_) {
    if (!(beta > 0.0))
      throw std::domain_error("TestFunctionParams: beta must be positive");
    if (!(t_shift >= 1.0))
      throw std::domain_error("TestFunctionParams: t_shift must be >= 1");
  }
};

/// Space-time point with |x| = r inside the light cone r < t. Radii down to
/// r = 0 are admitted (the light-cone integral identity lives on the whole
/// cone); evaluations on the exterior domain additionally require r >= 1.
struct LightConePoint {
  double r;
  double t;
  LightConePoint(double r_, double t_) : r(r_), t(t_) {
    if (!(r >= 0.0)) throw std::domain_error("LightConePoint: r must be >= 0");
    if (!(t > 0.0 && r < t))
      throw std::domain_error("LightConePoint: requires 0 < r < t");
  }
};

/// Surface measure of the unit sphere S^{N-1}.
inline double sphere_area(int dim_n) {
  return 2.0 * std::pow(specfun::detail::kPi, 0.5 * dim_n) /
         specfun::gamma_fn(0.5 * dim_n).value;
}

/// Harmonic weight U(x) = 1 - |x|^{2-N}, vanishing on the obstacle boundary.
inline double harmonic_u(const ExteriorGeometry& geom, double r) {
  if (!(r >= 1.0)) throw std::domain_error("harmonic_u: r must be >= 1");
  return 1.0 - std::pow(r, 2.0 - geom.dim_n);
}

namespace detail {

inline double log_c1(double nu) {  // log of 2^nu Gamma(nu+1)
  return nu * std::log(2.0) + specfun::detail::log_gamma(nu + 1.0);
}

// log psi1(z), z > 0
inline double log_psi1(double nu, double z) {
  const auto is = specfun::bessel_i_scaled(specfun::BesselOrder(nu), z);
  return log_c1(nu) - nu * std::log(z) + z + std::log(is.value);
}

// log of the second term of phi_lambda: (psi1(l)/psi2(l)) psi2(l r), in the
// normalization-free form c1 (l r)^{-nu} (I_nu(l)/K_nu(l)) K_nu(l r)
inline double log_phi_second_term(double nu, double lambda, double r) {
  const specfun::BesselOrder order(nu);
  const double lr = lambda * r;
  const auto il = specfun::bessel_i_scaled(order, lambda);
  const auto kl = specfun::bessel_k_scaled(order, lambda);
  const auto klr = specfun::bessel_k_scaled(order, lr);
  return log_c1(nu) + 2.0 * lambda + std::log(il.value) - std::log(kl.value) -
         nu * std::log(lr) - lr + std::log(klr.value);
}

}  // namespace detail

/// psi1(z) = 2^nu Gamma(nu+1) z^{-nu} I_nu(z); psi1(0) = 1, nondecreasing,
/// bounded by e^z.
inline double psi1(const ExteriorGeometry& geom, double z) {
  if (!(z >= 0.0)) throw std::domain_error("psi1: z must be >= 0");
  if (z == 0.0) return 1.0;
  return std::exp(detail::log_psi1(geom.nu, z));
}

/// psi2(z) = z^{-nu} K_nu(z) / (2^{nu-1} Gamma(nu)); z^{2 nu} psi2(z) -> 1 as
/// z -> 0. For N = 3 this is e^{-z}/z.
inline double psi2(const ExteriorGeometry& geom, double z) {
  if (!(z > 0.0)) throw std::domain_error("psi2: z must be > 0");
  const double nu = geom.nu;
  const double log_c2 =
      (nu - 1.0) * std::log(2.0) + specfun::detail::log_gamma(nu);
  const auto ks = specfun::bessel_k_scaled(specfun::BesselOrder(nu), z);
  return std::exp(-nu * std::log(z) - z + std::log(ks.value) - log_c2);
}

/// Dirichlet eigenfunction phi_lambda(r) = psi1(lambda r) -
/// (psi1(lambda)/psi2(lambda)) psi2(lambda r); vanishes at r = 1, positive
/// for r > 1, and tends to U(r) as lambda -> 0.
inline double phi_lambda(const ExteriorGeometry& geom, double lambda,
                         double r) {
  if (!(lambda > 0.0)) throw std::domain_error("phi_lambda: lambda must be > 0");
  if (!(r >= 1.0)) throw std::domain_error("phi_lambda: r must be >= 1");
  const double nu = geom.nu;
  return std::exp(detail::log_psi1(nu, lambda * r)) -
         std::exp(detail::log_phi_second_term(nu, lambda, r));
}

/// e^{-lambda t} psi1(lambda r), evaluated in scaled form; never overflows
/// for t > r.
inline double exp_weighted_psi1(const ExteriorGeometry& geom, double lambda,
                                double r, double t) {
  if (!(lambda > 0.0))
    throw std::domain_error("exp_weighted_psi1: lambda must be > 0");
  if (r == 0.0) return std::exp(-lambda * t);
  const double nu = geom.nu;
  const double lr = lambda * r;
  const auto is = specfun::bessel_i_scaled(specfun::BesselOrder(nu), lr);
  return std::exp(detail::log_c1(nu) - nu * std::log(lr) - lambda * (t - r) +
                  std::log(is.value));
}

/// e^{-lambda t} phi_lambda(r) in scaled form; requires t + r >= 2 so the
/// exponents stay nonpositive.
inline double exp_weighted_phi(const ExteriorGeometry& geom, double lambda,
                               double r, double t) {
  if (!(r >= 1.0)) throw std::domain_error("exp_weighted_phi: r must be >= 1");
  const double first = exp_weighted_psi1(geom, lambda, r, t);
  const double second =
      std::exp(detail::log_phi_second_term(geom.nu, lambda, r) - lambda * t);
  return first - second;
}

/// Finite-difference residual |lambda^2 phi - (phi'' + (N-1)/r phi')| of the
/// eigen-equation at r, with centered differences of step h.
inline double verify_eigen_equation(const ExteriorGeometry& geom,
                                    double lambda, double r, double h) {
  if (!(h > 0.0 && r > 1.0 + 2.0 * h))
    throw std::domain_error("verify_eigen_equation: requires r > 1 + 2h");
  const double fm = phi_lambda(geom, lambda, r - h);
  const double f0 = phi_lambda(geom, lambda, r);
  const double fp = phi_lambda(geom, lambda, r + h);
  const double second = (fp - 2.0 * f0 + fm) / (h * h);
  const double first = (fp - fm) / (2.0 * h);
  const double laplacian = second + (geom.dim_n - 1.0) / r * first;
  return std::abs(lambda * lambda * f0 - laplacian);
}

namespace detail {

// first-order estimate of Q(beta, x) = Gamma(beta, x)/Gamma(beta), x large
inline double upper_gamma_tail(double beta, double x) {
  const double lg = specfun::detail::log_gamma(beta);
  const double le = (beta - 1.0) * std::log(x) - x - lg;
  if (le < -700.0) return 0.0;
  return std::exp(le) * (1.0 + std::abs(beta - 1.0) / x);
}

// truncation point beyond which the dominated integrand
// e^{-lambda (t-r)} lambda^{beta-1} contributes below 1e-16 Gamma(beta)
inline double lambda_cutoff(double beta, double gap) {
  return (beta + 40.0 * std::log(10.0)) / gap;
}

}  // namespace detail

/// Phi_beta(x,t) = (1/Gamma(beta)) \int_0^1 e^{-lambda t} phi_lambda(x)
/// lambda^{beta-1} d lambda, for |x| = r >= 1 inside the light cone.
/// The lambda^{beta-1} endpoint weight is removed by the substitution
/// lambda = u^{1/beta} when beta < 1; for large t the integration interval
/// is truncated where the dominated integrand is certifiably negligible,
/// with the analytic tail bound added to the error estimate.
inline EvalResult phi_beta(const ExteriorGeometry& geom,
                           const TestFunctionParams& params,
                           const LightConePoint& point) {
  if (!(point.r >= 1.0))
    throw std::domain_error("phi_beta: point must lie in the exterior domain");
  const double beta = params.beta;
  const double r = point.r;
  const double t = point.t;
  const double gap = t - r;
  const double upper = std::min(1.0, detail::lambda_cutoff(beta, gap));
  double tail = 0.0;
  if (upper < 1.0)
    tail = detail::upper_gamma_tail(beta, upper * gap) / std::pow(gap, beta);
  const double inv_gamma_beta1 =
      1.0 / std::exp(specfun::detail::log_gamma(beta + 1.0));
  quadrature::Result q;
  if (beta < 1.0) {
    auto f = [&](double u) {
      const double lambda = std::pow(u, 1.0 / beta);
      return inv_gamma_beta1 * exp_weighted_phi(geom, lambda, r, t);
    };
    q = quadrature::integrate(f, 0.0, std::pow(upper, beta),
                              params.quad_tolerance,
                              params.quad_max_subdivisions);
  } else {
    const double inv_gamma_beta =
        1.0 / std::exp(specfun::detail::log_gamma(beta));
    auto f = [&](double lambda) {
      return inv_gamma_beta * std::pow(lambda, beta - 1.0) *
             exp_weighted_phi(geom, lambda, r, t);
    };
    q = quadrature::integrate(f, 0.0, upper, params.quad_tolerance,
                              params.quad_max_subdivisions);
  }
  if (!q.converged)
    throw AccuracyError("phi_beta: quadrature failed to meet tolerance within " +
                            std::to_string(params.quad_max_subdivisions) +
                            " subdivisions",
                        q.value, q.error_estimate);
  return {q.value, q.error_estimate + tail};
}

/// Truncated evaluation of (1/Gamma(beta)) \int_0^infty e^{-lambda t}
/// psi1(lambda r) lambda^{beta-1} d lambda on the light cone r < t. Equals
/// t^{-beta} F(beta/2, (beta+1)/2, N/2; r^2/t^2). The truncation point is
/// chosen so the dominated tail e^{-lambda (t-r)} lambda^{beta-1} contributes
/// below 1e-16 Gamma(beta).
inline EvalResult yz_integral(const ExteriorGeometry& geom, double beta,
                              const LightConePoint& point,
                              double quad_tolerance = 1e-10,
                              int quad_max_subdivisions = 2000) {
  if (!(beta > 0.0)) throw std::domain_error("yz_integral: beta must be > 0");
  const double r = point.r;
  const double t = point.t;
  const double gap = t - r;
  const double cutoff = std::max(1.0, (beta + 40.0 * std::log(10.0)) / gap);
  quadrature::Result q;
  if (beta < 1.0) {
    const double inv_gamma_beta1 =
        1.0 / std::exp(specfun::detail::log_gamma(beta + 1.0));
    auto f = [&](double u) {
      const double lambda = std::pow(u, 1.0 / beta);
      return inv_gamma_beta1 * exp_weighted_psi1(geom, lambda, r, t);
    };
    q = quadrature::integrate(f, 0.0, std::pow(cutoff, beta), quad_tolerance,
                              quad_max_subdivisions);
  } else {
    const double inv_gamma_beta =
        1.0 / std::exp(specfun::detail::log_gamma(beta));
    auto f = [&](double lambda) {
      return inv_gamma_beta * std::pow(lambda, beta - 1.0) *
             exp_weighted_psi1(geom, lambda, r, t);
    };
    q = quadrature::integrate(f, 0.0, cutoff, quad_tolerance,
                              quad_max_subdivisions);
  }
  if (!q.converged)
    throw AccuracyError("yz_integral: quadrature failed to meet tolerance",
                        q.value, q.error_estimate);
  // analytic bound on the discarded tail, in the same scaling as the result
  const double tail =
      detail::upper_gamma_tail(beta, cutoff * gap) / std::pow(gap, beta);
  return {q.value, q.error_estimate + tail};
}

/// Shifted family: Phi~_beta(x,t) = t_shift^beta Phi_beta(x, t_shift + t).
inline double shifted_phi(const ExteriorGeometry& geom,
                          const TestFunctionParams& params, double r,
                          double t) {
  if (!(r < params.t_shift + t))
    throw std::domain_error("shifted_phi: point outside the shifted cone");
  const LightConePoint point(r, params.t_shift + t);
  return std::pow(params.t_shift, params.beta) *
         phi_beta(geom, params, point).value;
}

/// Residual |(Phi_beta(t+h) - Phi_beta(t-h))/(2h) + beta Phi_{beta+1}(t)| of
/// the derivative relation; decays at second order in h.
inline double dt_relation_check(const ExteriorGeometry& geom,
                                const TestFunctionParams& params,
                                const LightConePoint& point, double h) {
  if (!(h > 0.0 && point.t - h > point.r))
    throw std::domain_error("dt_relation_check: step leaves the light cone");
  TestFunctionParams up(params.beta + 1.0, params.t_shift);
  up.quad_tolerance = params.quad_tolerance;
  up.quad_max_subdivisions = params.quad_max_subdivisions;
  const double plus =
      phi_beta(geom, params, LightConePoint(point.r, point.t + h)).value;
  const double minus =
      phi_beta(geom, params, LightConePoint(point.r, point.t - h)).value;
  const double upward = phi_beta(geom, up, point).value;
  return std::abs((plus - minus) / (2.0 * h) + params.beta * upward);
}

using RadialProfile = std::function<double(double)>;

/// |S^{N-1}| \int g(r) U(r) r^{N-1} dr over [1, r0].
inline double weighted_data_integral(const ExteriorGeometry& geom,
                                     const RadialProfile& g,
                                     double abs_tol = 1e-12) {
  auto f = [&](double r) {
    return g(r) * harmonic_u(geom, r) * std::pow(r, geom.dim_n - 1.0);
  };
  const auto q =
      quadrature::integrate(f, 1.0, geom.support_radius_r0, abs_tol, 4000);
  return sphere_area(geom.dim_n) * q.value;
}

/// I_beta(t_shift) = \int g Phi~_beta(.,0) dx + (beta/t_shift) \int f
/// Phi~_{beta+1}(.,0) dx for radial data supported in [1, r0].
inline double initial_functional(const ExteriorGeometry& geom,
                                 const TestFunctionParams& params,
                                 const RadialProfile& f_profile,
                                 const RadialProfile& g_profile) {
  const double beta = params.beta;
  TestFunctionParams up(beta + 1.0, params.t_shift);
  up.quad_tolerance = params.quad_tolerance;
  up.quad_max_subdivisions = params.quad_max_subdivisions;
  const double w = geom.dim_n - 1.0;
  auto g_term = [&](double r) {
    return g_profile(r) * shifted_phi(geom, params, r, 0.0) * std::pow(r, w);
  };
  auto f_term = [&](double r) {
    return f_profile(r) * shifted_phi(geom, up, r, 0.0) * std::pow(r, w);
  };
  const double tol = std::max(params.quad_tolerance, 1e-12);
  const auto qg = quadrature::integrate(g_term, 1.0, geom.support_radius_r0,
                                        tol, params.quad_max_subdivisions);
  const auto qf = quadrature::integrate(f_term, 1.0, geom.support_radius_r0,
                                        tol, params.quad_max_subdivisions);
  return sphere_area(geom.dim_n) *
         (qg.value + beta / params.t_shift * qf.value);
}

/// Smallest t_shift on the geometric grid {2 r0, 4 r0, ...} (capped at
/// 2^16 r0) for which I_beta >= (1/2) \int g U dx. The existence is only
/// guaranteed in the large-shift limit, hence the search.
inline double select_t_shift(const ExteriorGeometry& geom,
                             const TestFunctionParams& params,
                             const RadialProfile& f_profile,
                             const RadialProfile& g_profile) {
  const double gU = weighted_data_integral(geom, g_profile);
  if (!(gU > 0.0))
    throw std::domain_error(
        "select_t_shift: requires positive \\int g U dx (got " +
        std::to_string(gU) + ")");
  const double target = 0.5 * gU;
  for (int k = 0; k <= 15; ++k) {
    const double ts = 2.0 * geom.support_radius_r0 * std::pow(2.0, k);
    TestFunctionParams trial(params.beta, ts);
    trial.quad_tolerance = params.quad_tolerance;
    trial.quad_max_subdivisions = params.quad_max_subdivisions;
    if (initial_functional(geom, trial, f_profile, g_profile) >= target)
      return ts;
  }
  throw std::runtime_error(
      "select_t_shift: search exhausted at 2^16 r0; data is ill-conditioned");
}

}  // namespace blowuplab::testfam
