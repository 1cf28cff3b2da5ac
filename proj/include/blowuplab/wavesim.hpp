#pragma once

// Explicit leapfrog evolution of the radial semilinear wave equation
//   u_tt = u_rr + (N-1)/r u_r + |u|^p
// on r in (1, r_max) with homogeneous Dirichlet data at r = 1, initial data
// (eps f, eps g), and first-crossing blowup detection. The outer boundary is
// sized so it stays causally inert over the run (propagation speed <= 1).

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blowuplab/quadrature.hpp"
#include "blowuplab/testfam.hpp"

namespace blowuplab::wavesim {

using testfam::ExteriorGeometry;

/// Uniform grid r_j = 1 + j dr, j = 0 .. n_points-1; the first entry sits on
/// the obstacle boundary.
struct RadialGrid {
  double dr;
  int n_points;
  RadialGrid(double dr_, int n_points_) : dr(dr_), n_points(n_points_) {
    if (!(dr > 0.0)) throw std::invalid_argument("RadialGrid: dr must be > 0");
    if (n_points < 8)
      throw std::invalid_argument("RadialGrid: grid too small");
  }
  double r(int j) const { return 1.0 + j * dr; }
  double r_max() const { return 1.0 + n_points * dr; }
};

/// Radial data profiles (f, g) with eps scaling; profiles vanish outside
/// [support_a, support_b] with 1 < a < b <= r0.
struct InitialData {
  std::function<double(double)> f_profile;
  std::function<double(double)> g_profile;
  double epsilon;
  double support_a;
  double support_b;
};

struct SolverConfig {
  double p_exponent;
  double cfl_factor = 0.45;
  double blowup_threshold = 1e6;
  double t_horizon = 100.0;
  bool enable_nonlinearity = true;
};

/// Two running time levels: u_prev at t - dt, u_curr at t.
struct WaveState {
  std::vector<double> u_prev;
  std::vector<double> u_curr;
  double t = 0.0;
  long step_index = 0;
};

/// Smooth compactly supported bump: amplitude * exp(-1/(1-xi^2)) with
/// xi = (2s - a - b)/(b - a) on (a, b), zero outside.
inline std::function<double(double)> make_bump(double a, double b,
                                               double amplitude) {
  if (!(a > 1.0 && b > a))
    throw std::domain_error("make_bump: requires 1 < a < b");
  return [a, b, amplitude](double s) {
    const double xi = (2.0 * s - a - b) / (b - a);
    if (!(std::abs(xi) < 1.0)) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - xi * xi));
  };
}

/// Signed value of |S^{N-1}| \int g U r^{N-1} dr; its sign decides
/// eligibility for the blowup theorem.
inline double check_positivity(const InitialData& data,
                               const ExteriorGeometry& geom) {
  auto f = [&](double r) {
    return data.g_profile(r) * testfam::harmonic_u(geom, r) *
           std::pow(r, geom.dim_n - 1.0);
  };
  const auto q =
      quadrature::integrate(f, data.support_a, data.support_b, 1e-13, 4000);
  return testfam::sphere_area(geom.dim_n) * q.value;
}

namespace detail {

inline void validate_config(const SolverConfig& config) {
  if (!(config.p_exponent > 1.0))
    throw std::invalid_argument("SolverConfig: p must exceed 1");
  if (!(config.cfl_factor > 0.0 && config.cfl_factor < 1.0))
    throw std::invalid_argument("SolverConfig: cfl_factor must lie in (0,1)");
  if (!(config.blowup_threshold > 0.0))
    throw std::invalid_argument("SolverConfig: blowup_threshold must be > 0");
  if (!(config.t_horizon > 0.0))
    throw std::invalid_argument("SolverConfig: t_horizon must be > 0");
}

inline double source_term(double u, double p) {
  const double a = std::abs(u);
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::pow(a, p);
}

// first-derivative coefficients (N-1)/(2 dr r_j)
inline std::vector<double> advection_coefficients(const RadialGrid& grid,
                                                  const ExteriorGeometry& geom) {
  std::vector<double> coef(grid.n_points, 0.0);
  for (int j = 1; j + 1 < grid.n_points; ++j)
    coef[j] = (geom.dim_n - 1.0) / (2.0 * grid.dr * grid.r(j));
  return coef;
}

// one leapfrog update u_next = 2 u - u_prev + dt^2 (Lap u + |u|^p);
// returns max |u_next| (NaN-poisoned values surface as non-finite)
inline double advance(const std::vector<double>& u_prev,
                      const std::vector<double>& u, std::vector<double>& u_next,
                      const RadialGrid& grid, const SolverConfig& config,
                      const std::vector<double>& coef, double dt) {
  const int n = grid.n_points;
  const double idr2 = 1.0 / (grid.dr * grid.dr);
  const double dt2 = dt * dt;
  const double p = config.p_exponent;
  const bool nonlinear = config.enable_nonlinearity;
  double max_abs = 0.0;
  u_next[0] = 0.0;
  u_next[n - 1] = 0.0;
  for (int j = 1; j + 1 < n; ++j) {
    const double lap = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * idr2 +
                       coef[j] * (u[j + 1] - u[j - 1]);
    const double src = nonlinear ? source_term(u[j], p) : 0.0;
    const double v = 2.0 * u[j] - u_prev[j] + dt2 * (lap + src);
    u_next[j] = v;
    const double a = std::abs(v);
    if (!(a <= max_abs)) max_abs = a;  // NaN propagates to max
  }
  return max_abs;
}

}  // namespace detail

/// Sample the data on the grid and take the second-order Taylor first step
/// u(dt) = eps f + dt eps g + dt^2/2 (Lap(eps f) + |eps f|^p); the state
/// returned holds time levels 0 and dt.
inline WaveState init_state(const RadialGrid& grid, const InitialData& data,
                            const SolverConfig& config,
                            const ExteriorGeometry& geom) {
  detail::validate_config(config);
  const int n = grid.n_points;
  const double dt = config.cfl_factor * grid.dr;
  WaveState state;
  state.u_prev.assign(n, 0.0);
  state.u_curr.assign(n, 0.0);
  for (int j = 1; j + 1 < n; ++j)
    state.u_prev[j] = data.epsilon * data.f_profile(grid.r(j));
  const auto coef = detail::advection_coefficients(grid, geom);
  const double idr2 = 1.0 / (grid.dr * grid.dr);
  for (int j = 1; j + 1 < n; ++j) {
    const double lap =
        (state.u_prev[j + 1] - 2.0 * state.u_prev[j] + state.u_prev[j - 1]) *
            idr2 +
        coef[j] * (state.u_prev[j + 1] - state.u_prev[j - 1]);
    const double src = config.enable_nonlinearity
                           ? detail::source_term(state.u_prev[j],
                                                 config.p_exponent)
                           : 0.0;
    state.u_curr[j] = state.u_prev[j] +
                      dt * data.epsilon * data.g_profile(grid.r(j)) +
                      0.5 * dt * dt * (lap + src);
  }
  state.t = dt;
  state.step_index = 1;
  return state;
}

/// Advance the state by one time step in place; returns max |u| of the new
/// level. Boundary entries stay exactly zero.
inline double step(WaveState& state, const RadialGrid& grid,
                   const SolverConfig& config, const ExteriorGeometry& geom) {
  const auto coef = detail::advection_coefficients(grid, geom);
  const double dt = config.cfl_factor * grid.dr;
  std::vector<double> u_next(grid.n_points, 0.0);
  const double max_abs =
      detail::advance(state.u_prev, state.u_curr, u_next, grid, config, coef, dt);
  state.u_prev = std::move(state.u_curr);
  state.u_curr = std::move(u_next);
  state.t += dt;
  state.step_index += 1;
  return max_abs;
}

/// Decimated state capture: u and the centered time derivative at time t.
struct Snapshot {
  double t;
  std::vector<double> u;
  std::vector<double> ut;
};

struct RunOptions {
  int snapshot_stride = 0;  // 0 = keep no history
  std::vector<double> crossing_thresholds;
};

struct RunResult {
  bool blew_up = false;
  double t_num = std::numeric_limits<double>::infinity();
  double t_end = 0.0;
  long steps = 0;
  double dr = 0.0;
  double dt = 0.0;
  // first-crossing times for the requested auxiliary thresholds
  std::vector<std::pair<double, double>> crossings;
  std::vector<Snapshot> history;
  WaveState final_state;
};

/// Run until max_j |u_j| first reaches the blowup threshold (or turns
/// non-finite), or until the horizon; a horizon exit is a valid outcome.
inline RunResult run_until_blowup(const RadialGrid& grid,
                                  const InitialData& data,
                                  const SolverConfig& config,
                                  const ExteriorGeometry& geom,
                                  const RunOptions& options = {}) {
  detail::validate_config(config);
  if (grid.r_max() <
      geom.support_radius_r0 + config.t_horizon + 2.0 * grid.dr)
    throw std::invalid_argument(
        "run_until_blowup: grid too small for the horizon; the outer "
        "boundary must stay causally inert");

  const double dt = config.cfl_factor * grid.dr;
  // total time levels spanning the horizon, counting the Taylor first step
  const long n_levels =
      static_cast<long>(std::ceil(config.t_horizon / dt - 1e-9));
  const long n_steps = std::max<long>(n_levels - 1, 0);
  const int n = grid.n_points;

  RunResult result;
  result.dr = grid.dr;
  result.dt = dt;
  for (double thr : options.crossing_thresholds)
    result.crossings.emplace_back(thr, std::numeric_limits<double>::infinity());

  WaveState state = init_state(grid, data, config, geom);
  const auto coef = detail::advection_coefficients(grid, geom);

  const int stride = options.snapshot_stride;
  if (stride > 0) {
    Snapshot s0;
    s0.t = 0.0;
    s0.u.assign(n, 0.0);
    s0.ut.assign(n, 0.0);
    for (int j = 1; j + 1 < n; ++j) {
      s0.u[j] = data.epsilon * data.f_profile(grid.r(j));
      s0.ut[j] = data.epsilon * data.g_profile(grid.r(j));
    }
    result.history.push_back(std::move(s0));
  }

  std::vector<double> u_next(n, 0.0);
  for (long step_i = 1; step_i <= n_steps; ++step_i) {
    // state holds levels (step_i - 1, step_i); compute level step_i + 1
    const double max_abs = detail::advance(state.u_prev, state.u_curr, u_next,
                                           grid, config, coef, dt);
    const double t_new = state.t + dt;

    if (stride > 0 && step_i % stride == 0) {
      Snapshot s;
      s.t = state.t;
      s.u = state.u_curr;
      s.ut.assign(n, 0.0);
      for (int j = 1; j + 1 < n; ++j)
        s.ut[j] = (u_next[j] - state.u_prev[j]) / (2.0 * dt);
      result.history.push_back(std::move(s));
    }

    for (auto& [thr, t_cross] : result.crossings)
      if (max_abs >= thr && t_cross == std::numeric_limits<double>::infinity())
        t_cross = t_new;

    const bool exploded =
        !std::isfinite(max_abs) || max_abs >= config.blowup_threshold;

    std::swap(state.u_prev, state.u_curr);
    std::swap(state.u_curr, u_next);
    state.t = t_new;
    state.step_index += 1;

    if (exploded) {
      result.blew_up = true;
      result.t_num = t_new;
      result.t_end = t_new;
      result.steps = step_i;
      result.final_state = std::move(state);
      return result;
    }
  }
  result.t_end = state.t;
  result.steps = state.step_index;
  result.final_state = std::move(state);
  return result;
}

/// Grid sized so the zero outer boundary is causally unreachable within the
/// horizon given data supported in [1, r0].
inline RadialGrid make_grid_for_horizon(const ExteriorGeometry& geom,
                                        double dr, double t_horizon) {
  const double needed = geom.support_radius_r0 + t_horizon + 2.0 * dr;
  const int n = static_cast<int>(std::ceil((needed - 1.0) / dr)) + 4;
  return RadialGrid(dr, n);
}

}  // namespace blowuplab::wavesim
