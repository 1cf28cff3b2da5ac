#pragma once

// Lifespan sweeps over the data size eps and the log-log scaling fit against
// the subcritical prediction T_eps ~ eps^{-2p(p-1)/gamma(N,p)}, together with
// the exponent arithmetic gamma(N,p), p_S(N), beta_p.

#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "blowuplab/wavesim.hpp"

namespace blowuplab::lifespan {

using testfam::ExteriorGeometry;

/// gamma(N,p) = 2 + (N+1)p - (N-1)p^2; positive exactly on 1 < p < p_S(N).
inline double gamma_np(int dim_n, double p) {
  if (dim_n < 3) throw std::domain_error("gamma_np: N must be >= 3");
  if (!(p > 1.0)) throw std::domain_error("gamma_np: p must exceed 1");
  return 2.0 + (dim_n + 1.0) * p - (dim_n - 1.0) * p * p;
}

/// Strauss exponent p_S(N): the positive root of (N-1)p^2 - (N+1)p - 2 = 0.
inline double strauss_exponent(int dim_n) {
  if (dim_n < 2) throw std::domain_error("strauss_exponent: N must be >= 2");
  const double a = dim_n + 1.0;
  return (a + std::sqrt(a * a + 8.0 * (dim_n - 1.0))) / (2.0 * (dim_n - 1.0));
}

/// beta_p = (N-1)/2 - 1/p = N - (N-1)p/2 at the critical exponent; the two
/// expressions agreeing (to 1e-12) certifies p = p_S(N).
inline double beta_critical(int dim_n, double p) {
  const double form1 = 0.5 * (dim_n - 1.0) - 1.0 / p;
  const double form2 = dim_n - 0.5 * (dim_n - 1.0) * p;
  if (std::abs(form1 - form2) > 1e-12 * std::max(1.0, std::abs(form1)))
    throw std::domain_error(
        "beta_critical: expressions disagree, p is not the critical exponent");
  if (!(form1 > 0.0))
    throw std::domain_error("beta_critical: beta_p must be positive");
  return form1;
}

/// Predicted lifespan exponent 2p(p-1)/gamma(N,p) for 1 < p < p_S(N).
inline double predicted_exponent(int dim_n, double p) {
  if (!(p > 1.0 && p < strauss_exponent(dim_n)))
    throw std::domain_error(
        "predicted_exponent: requires 1 < p < p_S(N); the exponent diverges "
        "at criticality");
  return 2.0 * p * (p - 1.0) / gamma_np(dim_n, p);
}

/// One sweep entry: eps, the numerically estimated lifespan at the finer of
/// two resolutions, and the dr-refinement agreement flag.
struct LifespanRecord {
  double epsilon = 0.0;
  double t_num = std::numeric_limits<double>::infinity();
  bool finite_lifespan = false;
  double dr = 0.0;
  double dt = 0.0;
  double threshold = 0.0;
  bool converged = false;
  double t_num_coarse = std::numeric_limits<double>::infinity();
  double horizon = 0.0;
  // first-crossing times at auxiliary thresholds, for threshold-robustness
  std::vector<std::pair<double, double>> crossings;
  std::string error;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double predicted_slope = 0.0;
  int n_points = 0;
};

struct SweepSettings {
  std::vector<double> epsilons;
  double dr = 0.02;
  double bootstrap_horizon = 200.0;
  double refinement_agreement = 0.05;
  std::vector<double> crossing_thresholds = {1e3, 1e6};
  int jobs = 0;  // 0 = hardware concurrency
};

namespace detail {

struct LinearFit {
  double slope, intercept, r_squared;
};

inline LinearFit least_squares(const std::vector<double>& x,
                               const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw std::runtime_error("least_squares: degenerate abscissae");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double r2 = 1.0;
  if (syy > 0.0) {
    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
      const double resid = y[i] - (intercept + slope * x[i]);
      sse += resid * resid;
    }
    r2 = 1.0 - sse / syy;
  }
  return {slope, intercept, r2};
}

inline LifespanRecord run_single(const ExteriorGeometry& geom,
                                 const wavesim::InitialData& base_data,
                                 const wavesim::SolverConfig& base_config,
                                 const SweepSettings& settings, double epsilon,
                                 double horizon) {
  LifespanRecord rec;
  rec.epsilon = epsilon;
  rec.threshold = base_config.blowup_threshold;
  rec.horizon = horizon;
  try {
    wavesim::InitialData data = base_data;
    data.epsilon = epsilon;
    wavesim::SolverConfig config = base_config;
    config.t_horizon = horizon;
    wavesim::RunOptions options;
    options.crossing_thresholds = settings.crossing_thresholds;

    const auto grid_c =
        wavesim::make_grid_for_horizon(geom, settings.dr, horizon);
    const auto coarse = wavesim::run_until_blowup(grid_c, data, config, geom);
    const auto grid_f =
        wavesim::make_grid_for_horizon(geom, 0.5 * settings.dr, horizon);
    const auto fine =
        wavesim::run_until_blowup(grid_f, data, config, geom, options);

    rec.dr = fine.dr;
    rec.dt = fine.dt;
    rec.finite_lifespan = fine.blew_up;
    rec.t_num = fine.t_num;
    rec.t_num_coarse = coarse.t_num;
    rec.crossings = fine.crossings;
    rec.converged = fine.blew_up && coarse.blew_up &&
                    std::abs(fine.t_num - coarse.t_num) <=
                        settings.refinement_agreement * fine.t_num;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.converged = false;
  }
  return rec;
}

}  // namespace detail

/// Run one lifespan estimate per eps. Horizons are bootstrapped: the first
/// two entries use the fixed bootstrap horizon, later ones 3x the lifespan
/// predicted by a provisional fit of the finished records. Per-run failures
/// are attached to their records and never abort the sweep.
inline std::vector<LifespanRecord> sweep(const ExteriorGeometry& geom,
                                         const wavesim::InitialData& base_data,
                                         const wavesim::SolverConfig& base_config,
                                         const SweepSettings& settings) {
  const auto& eps = settings.epsilons;
  if (eps.empty()) throw std::invalid_argument("sweep: empty epsilon list");
  for (double e : eps)
    if (!(e > 0.0)) throw std::invalid_argument("sweep: eps must be positive");

  std::vector<LifespanRecord> records(eps.size());
  const int bootstrap_count = std::min<int>(2, static_cast<int>(eps.size()));
  for (int i = 0; i < bootstrap_count; ++i)
    records[i] = detail::run_single(geom, base_data, base_config, settings,
                                    eps[i], settings.bootstrap_horizon);

  // provisional fit for the remaining horizons
  std::vector<double> lx, ly;
  for (int i = 0; i < bootstrap_count; ++i)
    if (records[i].finite_lifespan) {
      lx.push_back(std::log(records[i].epsilon));
      ly.push_back(std::log(records[i].t_num));
    }
  auto horizon_for = [&](double e) {
    if (lx.size() >= 2) {
      const auto fit = detail::least_squares(lx, ly);
      const double predicted = std::exp(fit.intercept + fit.slope * std::log(e));
      return std::max(settings.bootstrap_horizon, 3.0 * predicted);
    }
    return settings.bootstrap_horizon;
  };

  int jobs = settings.jobs > 0
                 ? settings.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  std::mutex mu;
  size_t next = bootstrap_count;
  auto worker = [&]() {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= eps.size()) return;
        i = next++;
      }
      records[i] = detail::run_single(geom, base_data, base_config, settings,
                                      eps[i], horizon_for(eps[i]));
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return records;
}

/// Least-squares line through (ln eps, ln T) over finite converged records,
/// with the predicted slope -2p(p-1)/gamma(N,p) attached for comparison.
inline ScalingFit fit_subcritical(const std::vector<LifespanRecord>& records,
                                  int dim_n, double p) {
  std::vector<double> x, y;
  for (const auto& rec : records)
    if (rec.finite_lifespan && rec.converged) {
      x.push_back(std::log(rec.epsilon));
      y.push_back(std::log(rec.t_num));
    }
  if (x.size() < 3)
    throw std::runtime_error(
        "fit_subcritical: fewer than 3 usable (finite, converged) records");
  const auto fit = detail::least_squares(x, y);
  ScalingFit out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.predicted_slope = -predicted_exponent(dim_n, p);
  out.n_points = static_cast<int>(x.size());
  return out;
}

}  // namespace blowuplab::lifespan
