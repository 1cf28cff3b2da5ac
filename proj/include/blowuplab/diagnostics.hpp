#pragma once

// Test-function functionals evaluated on stored solution histories: the
// monotone functional G(t) = \int u_t U dx, the shifted-weight boundary
// functional, weighted space-time p-masses under the eta / eta* cutoffs,
// the pure-geometry volume scaling probe, the Y(R) aggregate, and the
// integrated multiplier-identity residual.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "blowuplab/quadrature.hpp"
#include "blowuplab/testfam.hpp"
#include "blowuplab/wavesim.hpp"

namespace blowuplab::diagnostics {

using testfam::ExteriorGeometry;
using testfam::TestFunctionParams;
using wavesim::RadialGrid;
using wavesim::Snapshot;

inline double holder_conjugate(double p) {
  if (!(p > 1.0)) throw std::domain_error("holder_conjugate: p must exceed 1");
  return p / (p - 1.0);
}

/// Smooth cutoff in time: eta = 1 on [0,1/2], 0 on [1,infty), nonincreasing,
/// realized as sigma(2-2s)/(sigma(2-2s)+sigma(2s-1)) with sigma(s)=e^{-1/s}.
/// The starred variant eta* zeroes eta below s = 1/2. Derivatives are
/// analytic; the identity evaluation needs eta' and eta'' explicitly.
struct CutoffSpec {
  double scale_R;

  explicit CutoffSpec(double r) : scale_R(r) {
    if (!(r > 1.0)) throw std::domain_error("CutoffSpec: scale must exceed 1");
  }

  static double sigma(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
  static double sigma_prime(double s) {
    return s > 0.0 ? sigma(s) / (s * s) : 0.0;
  }
  static double sigma_second(double s) {
    return s > 0.0 ? sigma(s) * (1.0 - 2.0 * s) / (s * s * s * s) : 0.0;
  }

  static double eta(double s) {
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    const double a = sigma(2.0 - 2.0 * s);
    const double b = sigma(2.0 * s - 1.0);
    return a / (a + b);
  }
  static double eta_prime(double s) {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    const double a = sigma(2.0 - 2.0 * s);
    const double b = sigma(2.0 * s - 1.0);
    const double ap = -2.0 * sigma_prime(2.0 - 2.0 * s);
    const double bp = 2.0 * sigma_prime(2.0 * s - 1.0);
    const double w = a + b;
    return (ap * b - a * bp) / (w * w);
  }
  static double eta_second(double s) {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    const double a = sigma(2.0 - 2.0 * s);
    const double b = sigma(2.0 * s - 1.0);
    const double ap = -2.0 * sigma_prime(2.0 - 2.0 * s);
    const double bp = 2.0 * sigma_prime(2.0 * s - 1.0);
    const double app = 4.0 * sigma_second(2.0 - 2.0 * s);
    const double bpp = 4.0 * sigma_second(2.0 * s - 1.0);
    const double w = a + b;
    const double wp = ap + bp;
    return ((app * b - a * bpp) * w - 2.0 * (ap * b - a * bp) * wp) /
           (w * w * w);
  }
  static double eta_star(double s) { return s >= 0.5 ? eta(s) : 0.0; }

  double eta_R(double t) const { return eta(t / scale_R); }
  double eta_R_prime(double t) const { return eta_prime(t / scale_R) / scale_R; }
  double eta_R_second(double t) const {
    return eta_second(t / scale_R) / (scale_R * scale_R);
  }
  double eta_star_R(double t) const { return eta_star(t / scale_R); }
};

struct FunctionalTrace {
  std::vector<double> times;
  std::vector<double> values;
};

namespace detail {

// |S^{N-1}| sum_j v_j w_j r_j^{N-1} dr (the integrand vanishes at both ends)
inline double radial_integral(const std::vector<double>& values,
                              const std::vector<double>& weight,
                              const RadialGrid& grid,
                              const ExteriorGeometry& geom) {
  double sum = 0.0;
  const int n = static_cast<int>(values.size());
  for (int j = 1; j + 1 < n; ++j)
    sum += values[j] * weight[j] * std::pow(grid.r(j), geom.dim_n - 1.0);
  return testfam::sphere_area(geom.dim_n) * sum * grid.dr;
}

inline std::vector<double> harmonic_weight_table(const RadialGrid& grid,
                                                 const ExteriorGeometry& geom,
                                                 int n) {
  std::vector<double> w(n, 0.0);
  for (int j = 0; j < n; ++j) w[j] = testfam::harmonic_u(geom, grid.r(j));
  return w;
}

// trapezoid over snapshot times restricted to [0, t_limit]
inline double time_trapezoid(const std::vector<double>& times,
                             const std::vector<double>& values,
                             double t_limit) {
  double acc = 0.0;
  for (size_t k = 0; k + 1 < times.size(); ++k) {
    if (times[k] >= t_limit) break;
    const double t1 = std::min(times[k + 1], t_limit);
    const double w = t1 - times[k];
    // linear interpolation of the integrand at a clipped right endpoint
    double v1 = values[k + 1];
    if (times[k + 1] > t_limit && times[k + 1] > times[k])
      v1 = values[k] + (values[k + 1] - values[k]) * (t1 - times[k]) /
                           (times[k + 1] - times[k]);
    acc += 0.5 * (values[k] + v1) * w;
  }
  return acc;
}

}  // namespace detail

/// Tabulated evaluator for the shifted weights Phi~_beta(r, t) =
/// t_shift^beta Phi_beta(r, t_shift + t) over a grid prefix. The lambda
/// integral over (0,1] is frozen into one composite Gauss rule on panels
/// graded geometrically toward 0, so phi_lambda is evaluated once per
/// (node, radius) and each space-time evaluation is a weighted dot product.
class ShiftedPhiTable {
 public:
  ShiftedPhiTable(const ExteriorGeometry& geom, const RadialGrid& grid,
                  int n_radii, double beta, double t_shift, int depth = 40)
      : geom_(geom), beta_(beta), t_shift_(t_shift), n_radii_(n_radii) {
    if (!(beta > 0.0)) throw std::domain_error("ShiftedPhiTable: beta > 0");
    if (!(t_shift >= 1.0))
      throw std::domain_error("ShiftedPhiTable: t_shift >= 1");
    // nodes on [2^{-m-1}, 2^{-m}], m = 0..depth-1, plus the stub [0, 2^{-depth}]
    const double inv_gamma = 1.0 / std::exp(specfun::detail::log_gamma(beta));
    for (int m = 0; m <= depth; ++m) {
      const double hi = std::pow(0.5, m);
      const double lo = (m == depth) ? 0.0 : 0.5 * hi;
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (int i = -7; i <= 7; ++i) {
        const int a = i < 0 ? -i : i;
        const double node = mid + (i < 0 ? -1.0 : 1.0) * half *
                                      quadrature::detail::kNodes[a];
        if (i < 0 && a == 0) continue;
        const double w = half * quadrature::detail::kWeights[a];
        lambda_.push_back(node);
        weight_.push_back(w * inv_gamma * std::pow(node, beta - 1.0));
      }
    }
    phi_.assign(lambda_.size() * n_radii_, 0.0);
    for (size_t q = 0; q < lambda_.size(); ++q)
      for (int j = 0; j < n_radii_; ++j) {
        const double r = grid.r(j);
        phi_[q * n_radii_ + j] =
            (r <= 1.0) ? 0.0 : testfam::phi_lambda(geom, lambda_[q], r);
      }
  }

  double beta() const { return beta_; }
  double t_shift() const { return t_shift_; }
  int n_radii() const { return n_radii_; }

  /// Fill out[j] = Phi~_beta(r_j, t) for j < n_radii.
  void eval_row(double t, std::vector<double>& out) const {
    out.assign(n_radii_, 0.0);
    const double shift_pow = std::pow(t_shift_, beta_);
    const double tt = t_shift_ + t;
    for (size_t q = 0; q < lambda_.size(); ++q) {
      const double wq = weight_[q] * std::exp(-lambda_[q] * tt) * shift_pow;
      if (wq == 0.0) continue;
      const double* row = &phi_[q * n_radii_];
      for (int j = 0; j < n_radii_; ++j) out[j] += wq * row[j];
    }
  }

  /// Single-point evaluation (used for cross-checks against the adaptive
  /// quadrature route).
  double eval(const RadialGrid& grid, int j, double t) const {
    (void)grid;
    if (j >= n_radii_) throw std::out_of_range("ShiftedPhiTable::eval");
    double acc = 0.0;
    const double shift_pow = std::pow(t_shift_, beta_);
    const double tt = t_shift_ + t;
    for (size_t q = 0; q < lambda_.size(); ++q)
      acc += weight_[q] * std::exp(-lambda_[q] * tt) * phi_[q * n_radii_ + j];
    return acc * shift_pow;
  }

 private:
  ExteriorGeometry geom_;
  double beta_;
  double t_shift_;
  int n_radii_;
  std::vector<double> lambda_;
  std::vector<double> weight_;
  std::vector<double> phi_;  // lambda-major
};

/// G(t) = |S^{N-1}| \int u_t U r^{N-1} dr together with its expected
/// derivative \int |u|^p U dx (the Delta u term pairs to zero against U
/// under the Dirichlet boundary). G is nondecreasing for positive-g data.
inline std::pair<FunctionalTrace, FunctionalTrace> functional_g(
    const std::vector<Snapshot>& history, const RadialGrid& grid,
    const ExteriorGeometry& geom, double p) {
  FunctionalTrace g_trace, source_trace;
  if (history.empty()) return {g_trace, source_trace};
  const int n = static_cast<int>(history.front().u.size());
  const auto weight = detail::harmonic_weight_table(grid, geom, n);
  std::vector<double> powed(n, 0.0);
  for (const auto& snap : history) {
    g_trace.times.push_back(snap.t);
    g_trace.values.push_back(
        detail::radial_integral(snap.ut, weight, grid, geom));
    for (int j = 0; j < n; ++j)
      powed[j] = std::pow(std::abs(snap.u[j]), p);
    source_trace.times.push_back(snap.t);
    source_trace.values.push_back(
        detail::radial_integral(powed, weight, grid, geom));
  }
  return {g_trace, source_trace};
}

/// Boundary functional of the shifted-weight identity:
///   \int ( u_t eta_R^{2p'} Phi~_beta + (beta/t_shift) u eta_R^{2p'}
///          Phi~_{beta+1} - 2p' u eta_R^{2p'-1} eta_R' Phi~_beta ) dx.
/// Its value at t = 0 is eps I_beta.
inline FunctionalTrace functional_f_beta(const std::vector<Snapshot>& history,
                                         const RadialGrid& grid,
                                         const ExteriorGeometry& geom,
                                         const ShiftedPhiTable& phi_beta_tab,
                                         const ShiftedPhiTable& phi_beta1_tab,
                                         double p, double cutoff_scale) {
  if (phi_beta1_tab.beta() != phi_beta_tab.beta() + 1.0 ||
      phi_beta1_tab.t_shift() != phi_beta_tab.t_shift())
    throw std::invalid_argument(
        "functional_f_beta: tables must share t_shift with orders beta, beta+1");
  const double pp = holder_conjugate(p);
  const double beta = phi_beta_tab.beta();
  const double t_shift = phi_beta_tab.t_shift();
  const CutoffSpec cutoff(cutoff_scale);
  FunctionalTrace trace;
  if (history.empty()) return trace;
  const int n = std::min(static_cast<int>(history.front().u.size()),
                         phi_beta_tab.n_radii());
  std::vector<double> wb, wb1, integrand(n, 0.0);
  for (const auto& snap : history) {
    phi_beta_tab.eval_row(snap.t, wb);
    phi_beta1_tab.eval_row(snap.t, wb1);
    const double eta = cutoff.eta_R(snap.t);
    const double eta_p = cutoff.eta_R_prime(snap.t);
    const double eta_pow = std::pow(eta, 2.0 * pp);
    const double eta_pow1 = eta > 0.0 ? std::pow(eta, 2.0 * pp - 1.0) : 0.0;
    double sum = 0.0;
    for (int j = 1; j + 1 < n; ++j) {
      const double cell =
          snap.ut[j] * eta_pow * wb[j] +
          (beta / t_shift) * snap.u[j] * eta_pow * wb1[j] -
          2.0 * pp * snap.u[j] * eta_pow1 * eta_p * wb[j];
      sum += cell * std::pow(grid.r(j), geom.dim_n - 1.0);
    }
    trace.times.push_back(snap.t);
    trace.values.push_back(testfam::sphere_area(geom.dim_n) * sum * grid.dr);
  }
  return trace;
}

enum class CutoffKind { Full, Star };

struct MassResult {
  double value = 0.0;
  bool truncated = false;  // history ended before the cutoff support did
};

/// Space-time p-mass \int_0^{T} \int |u|^p cutoff(t)^{2p'} w dx dt with
/// w = U (phi_table == nullptr) or w = Phi~_beta (phi_table set).
inline MassResult weighted_mass(const std::vector<Snapshot>& history,
                                const RadialGrid& grid,
                                const ExteriorGeometry& geom, double p,
                                double scale_R, CutoffKind kind,
                                const ShiftedPhiTable* phi_table = nullptr) {
  if (history.size() < 4)
    throw std::runtime_error("weighted_mass: history too coarse");
  const double pp = holder_conjugate(p);
  const CutoffSpec cutoff(scale_R);
  const int n = phi_table
                    ? std::min(static_cast<int>(history.front().u.size()),
                               phi_table->n_radii())
                    : static_cast<int>(history.front().u.size());
  std::vector<double> u_weight;
  if (!phi_table) u_weight = detail::harmonic_weight_table(grid, geom, n);

  std::vector<double> times, values, row;
  for (const auto& snap : history) {
    if (snap.t > scale_R) break;
    const double c = (kind == CutoffKind::Star) ? cutoff.eta_star_R(snap.t)
                                                : cutoff.eta_R(snap.t);
    double integral = 0.0;
    if (c > 0.0) {
      const double cpow = std::pow(c, 2.0 * pp);
      const double* w = nullptr;
      if (phi_table) {
        phi_table->eval_row(snap.t, row);
        w = row.data();
      } else {
        w = u_weight.data();
      }
      double sum = 0.0;
      for (int j = 1; j + 1 < n; ++j)
        sum += std::pow(std::abs(snap.u[j]), p) * w[j] *
               std::pow(grid.r(j), geom.dim_n - 1.0);
      integral = testfam::sphere_area(geom.dim_n) * sum * grid.dr * cpow;
    }
    times.push_back(snap.t);
    values.push_back(integral);
  }
  MassResult out;
  out.truncated = history.back().t < scale_R;
  const double limit = std::min(scale_R, history.back().t);
  out.value = detail::time_trapezoid(times, values, limit);
  return out;
}

struct VolumeProbe {
  std::vector<double> scales;
  std::vector<double> masses;
  double slope = 0.0;
  double expected_slope = 0.0;
};

/// Pure geometry factor R^{-2p'} \int_0^R \int_{Omega(t)} U dx dt over the
/// expanding truncated cones Omega(t) = Omega \cap B(0, R0+t); the fitted
/// log-log slope realizes the exponent N+1-2p' behind the volume bound.
inline VolumeProbe volume_scaling_probe(const ExteriorGeometry& geom, double p,
                                        const std::vector<double>& scales) {
  if (scales.size() < 3)
    throw std::runtime_error("volume_scaling_probe: need at least 3 scales");
  const double pp = holder_conjugate(p);
  VolumeProbe probe;
  probe.expected_slope = geom.dim_n + 1.0 - 2.0 * pp;
  auto cone_slice = [&](double t) {
    auto f = [&](double r) {
      return testfam::harmonic_u(geom, r) * std::pow(r, geom.dim_n - 1.0);
    };
    const double outer = geom.support_radius_r0 + t;
    return testfam::sphere_area(geom.dim_n) *
           quadrature::integrate(f, 1.0, outer, 1e-9 * outer, 2000).value;
  };
  std::vector<double> lx, ly;
  for (double R : scales) {
    const auto q = quadrature::integrate(cone_slice, 0.0, R, 1e-7 * R, 2000);
    const double mass = std::pow(R, -2.0 * pp) * q.value;
    probe.scales.push_back(R);
    probe.masses.push_back(mass);
    lx.push_back(std::log(R));
    ly.push_back(std::log(mass));
  }
  // least squares in log-log
  const int n = static_cast<int>(lx.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  probe.slope = sxy / sxx;
  return probe;
}

struct YTable {
  std::vector<double> scales;     // R grid
  std::vector<double> y_values;   // Y(R)
  std::vector<double> inner_mass; // the rho = R inner integral (= R Y'(R))
};

/// Y(R) = \int_0^R ( \int\int |u|^p (eta_rho^*)^{2p'} Phi~_beta dx dt )
/// rho^{-1} d rho, tabulated on an R grid by integrating the inner mass in
/// log rho. Nondecreasing in R by construction.
inline YTable y_aggregate(const std::vector<Snapshot>& history,
                          const RadialGrid& grid, const ExteriorGeometry& geom,
                          const ShiftedPhiTable& phi_table, double p,
                          const std::vector<double>& scales,
                          int refine_per_interval = 4) {
  if (scales.size() < 2) throw std::runtime_error("y_aggregate: need >= 2 scales");
  auto inner = [&](double rho) {
    return weighted_mass(history, grid, geom, p, rho, CutoffKind::Star,
                         &phi_table)
        .value;
  };
  YTable table;
  double y = 0.0;
  // the eta*_rho support starts at t = rho/2, so masses vanish for rho below
  // twice the first snapshot spacing; start the log-trapezoid at scales[0]/8
  double lo = std::max(scales.front() / 8.0, 1.0 + 1e-9);
  double prev_rho = lo;
  double prev_m = inner(lo);
  for (double R : scales) {
    const int steps = refine_per_interval;
    const double ratio = std::pow(R / prev_rho, 1.0 / steps);
    for (int s = 1; s <= steps; ++s) {
      const double rho = prev_rho * std::pow(ratio, s);
      const double m = inner(rho);
      y += 0.5 * (prev_m + m) * std::log(rho / (prev_rho * std::pow(ratio, s - 1.0)));
      prev_m = m;
    }
    prev_rho = R;
    table.scales.push_back(R);
    table.y_values.push_back(y);
    table.inner_mass.push_back(prev_m);
  }
  return table;
}

/// Residual of the time-integrated multiplier identity with Psi =
/// eta_R^{2p'} U over [0, T]:
///   \int\int |u|^p Psi = [\int (u_t Psi - u Psi_t)]_0^T + \int\int u Psi_tt
/// (Delta Psi = eta^{2p'} Delta U = 0). Converges under grid refinement on a
/// smooth pre-blowup window.
inline double tfm_residual(const std::vector<Snapshot>& history,
                           const RadialGrid& grid,
                           const ExteriorGeometry& geom, double p,
                           double cutoff_scale, double t_window) {
  if (history.size() < 4) throw std::runtime_error("tfm_residual: short history");
  const double pp = holder_conjugate(p);
  const CutoffSpec cutoff(cutoff_scale);
  const int n = static_cast<int>(history.front().u.size());
  const auto weight = detail::harmonic_weight_table(grid, geom, n);

  std::vector<double> times, lhs_vals, rhs_bulk_vals;
  std::vector<double> cell(n, 0.0);
  size_t k_end = 0;
  for (size_t k = 0; k < history.size(); ++k) {
    const auto& snap = history[k];
    if (snap.t > t_window + 1e-12) break;
    k_end = k;
    const double s = snap.t;
    const double eta = cutoff.eta_R(s);
    const double eta_p = cutoff.eta_R_prime(s);
    const double eta_pp2 = cutoff.eta_R_second(s);
    const double psi_fac = std::pow(eta, 2.0 * pp);
    // d^2/dt^2 of eta_R^{2p'}
    const double psi_tt_fac =
        eta > 0.0 ? 2.0 * pp * std::pow(eta, 2.0 * pp - 2.0) *
                        ((2.0 * pp - 1.0) * eta_p * eta_p + eta * eta_pp2)
                  : 0.0;
    for (int j = 0; j < n; ++j)
      cell[j] = std::pow(std::abs(snap.u[j]), p) * psi_fac;
    times.push_back(s);
    lhs_vals.push_back(detail::radial_integral(cell, weight, grid, geom));
    for (int j = 0; j < n; ++j) cell[j] = snap.u[j] * psi_tt_fac;
    rhs_bulk_vals.push_back(detail::radial_integral(cell, weight, grid, geom));
  }
  if (k_end + 1 < 3) throw std::runtime_error("tfm_residual: window too short");

  auto boundary_term = [&](const Snapshot& snap) {
    const double s = snap.t;
    const double eta = cutoff.eta_R(s);
    const double eta_p = cutoff.eta_R_prime(s);
    const double psi_fac = std::pow(eta, 2.0 * pp);
    const double psi_t_fac =
        eta > 0.0 ? 2.0 * pp * std::pow(eta, 2.0 * pp - 1.0) * eta_p : 0.0;
    for (int j = 0; j < n; ++j)
      cell[j] = snap.ut[j] * psi_fac - snap.u[j] * psi_t_fac;
    return detail::radial_integral(cell, weight, grid, geom);
  };

  const double t_limit = times[k_end];
  const double lhs = detail::time_trapezoid(times, lhs_vals, t_limit);
  const double rhs = boundary_term(history[k_end]) - boundary_term(history[0]) +
                     detail::time_trapezoid(times, rhs_bulk_vals, t_limit);
  return std::abs(lhs - rhs);
}

}  // namespace blowuplab::diagnostics
