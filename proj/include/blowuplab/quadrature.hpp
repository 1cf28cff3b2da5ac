#pragma once

// Adaptive panel-bisection quadrature with a fixed-order Gauss-Legendre rule
// per panel. The integrands here are smooth away from a possible endpoint
// weight, which callers regularize by substitution before integrating.

#include <cmath>
#include <utility>
#include <vector>

namespace blowuplab::quadrature {

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
  int panels_used = 0;
  bool converged = true;
};

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1,1] (positive half; symmetric).
inline constexpr double kNodes[8] = {
    0.0,
    0.201194093997434522301,
    0.394151347077563369897,
    0.570972172608538847537,
    0.724417731360170047416,
    0.848206583410427216201,
    0.937273392400705904308,
    0.98799251802048542849};
inline constexpr double kWeights[8] = {
    0.202578241925561272881,
    0.198431485327111576456,
    0.186161000015562211027,
    0.166269205816993933553,
    0.139570677926154314448,
    0.107159220467171935012,
    0.0703660474881081247093,
    0.0307532419961172683546};

template <class F>
double gauss15(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = kWeights[0] * f(mid);
  for (int i = 1; i < 8; ++i) {
    const double dx = half * kNodes[i];
    sum += kWeights[i] * (f(mid + dx) + f(mid - dx));
  }
  return sum * half;
}

}  // namespace detail

/// Integrate f over [a,b] to absolute tolerance abs_tol, splitting at most
/// max_panels panels. A panel is accepted when refining it once moves the
/// estimate by less than its share of the tolerance.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, int max_panels) {
  Result out;
  if (a == b) return out;

  struct Panel {
    double a, b, tol, coarse;
  };
  std::vector<Panel> stack;
  stack.push_back({a, b, abs_tol, detail::gauss15(f, a, b)});

  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    ++out.panels_used;

    const double mid = 0.5 * (p.a + p.b);
    const double left = detail::gauss15(f, p.a, mid);
    const double right = detail::gauss15(f, mid, p.b);
    const double refined = left + right;
    const double err = std::abs(refined - p.coarse);

    const bool width_floor =
        (p.b - p.a) <= 1e-14 * (std::abs(p.a) + std::abs(p.b) + 1.0);
    if (err <= p.tol || width_floor) {
      out.value += refined;
      out.error_estimate += err;
      continue;
    }
    if (out.panels_used >= max_panels) {
      // out of budget: keep the refined value but flag the failure
      out.value += refined;
      out.error_estimate += err;
      out.converged = false;
      continue;
    }
    stack.push_back({p.a, mid, 0.5 * p.tol, left});
    stack.push_back({mid, p.b, 0.5 * p.tol, right});
  }
  return out;
}

}  // namespace blowuplab::quadrature
