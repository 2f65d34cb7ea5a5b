#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cvp/errors.hpp"

namespace cvp {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Legendre polynomial P_l(x) by the three-term recurrence.
inline double legendre(int l, double x) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration from Chebyshev guesses).
inline GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw domain_error("gauss_legendre: n must be positive");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

/// Integrate f over [a, b] with the rule mapped affinely.
template <class F>
double integrate(const GaussRule& rule, double a, double b, F&& f) {
  const double h = 0.5 * (b - a), m = 0.5 * (b + a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(m + h * rule.nodes[i]);
  return h * s;
}

/// Like integrate, after the substitution x = t (15 - 10 t^2 + 3 t^4) / 8, whose Jacobian
/// vanishes to second order at both ends. Suited to integrands with algebraic endpoint
/// singularities such as (x - a)^{3/2}.
template <class F>
double integrate_graded(const GaussRule& rule, double a, double b, F&& f) {
  const double h = 0.5 * (b - a), m = 0.5 * (b + a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i], t2 = t * t;
    const double x = t * (15.0 - 10.0 * t2 + 3.0 * t2 * t2) / 8.0;
    const double jac = 15.0 / 8.0 * (1.0 - t2) * (1.0 - t2);
    s += rule.weights[i] * jac * f(m + h * x);
  }
  return h * s;
}

}  // namespace cvp
