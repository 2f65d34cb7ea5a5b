#pragma once

// Lower bounds for the sphere from a difference of two heat kernels that stays
// below L and has non-negative spectral coefficients.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "cvp/errors.hpp"
#include "cvp/manifold.hpp"

namespace cvp {

/// h_t(theta) = sum_l (2l+1) exp(-t l(l+1)) P_l(cos theta); the sum stops once the
/// term bound (2l+1) exp(-t l(l+1)) drops below series_tol.
inline double heat_kernel(double t, double theta, double series_tol = 1e-16) {
  if (!(t > 0.0)) throw domain_error("heat_kernel: t must be positive");
  const double x = std::cos(theta);
  double p0 = 1.0, p1 = x;
  double s = 1.0;
  for (int l = 1;; ++l) {
    const double bound = (2.0 * l + 1.0) * std::exp(-t * l * (l + 1.0));
    if (bound < series_tol) break;
    const double pl = l == 1 ? p1 : ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
    if (l > 1) {
      p0 = p1;
      p1 = pl;
    }
    s += bound * pl;
  }
  return s;
}

struct HeatBound {
  double t1 = 0.0, t2 = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  double s_k = 0.0;
  bool dominated = false;
};

namespace detail {

inline HeatBound heat_bound_from_values(double tau, double t1, double t2, const std::vector<double>& theta,
                                        const std::vector<double>& h1, const std::vector<double>& h2,
                                        double h1_0, double h2_0, double h1_max, double h2_max) {
  HeatBound b{t1, t2};
  b.delta = h1_max / h2_max;
  const double denom = h1_0 - b.delta * h2_0;
  if (!(b.delta < 1.0) || !(b.delta >= 0.0) || !(denom > 0.0)) return b;
  b.lambda = kernel_scale(Sphere(tau)) / denom;
  b.s_k = b.lambda * (1.0 - b.delta);
  b.dominated = true;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double kv = b.lambda * (h1[k] - b.delta * h2[k]);
    const double lv = std::max(0.0, zonal_kernel(tau, std::cos(theta[k])));
    if (kv > lv + 1e-9) {
      b.dominated = false;
      break;
    }
  }
  return b;
}

inline std::vector<double> check_angles(std::size_t n) {
  std::vector<double> th(n);
  for (std::size_t k = 0; k < n; ++k) th[k] = n == 1 ? 0.0 : std::numbers::pi * k / (n - 1.0);
  return th;
}

}  // namespace detail

/// delta = h_t1(theta_max) / h_t2(theta_max), lambda = L(0) / (h_t1(0) - delta h_t2(0)),
/// S_K = lambda (1 - delta). `dominated` records K <= L on the check grid (within 1e-9).
inline HeatBound heat_kernel_bound(const Sphere& s, double t1, double t2, std::size_t check_grid = 10000) {
  if (!(t1 > 0.0) || !(t1 < t2)) throw domain_error("heat_kernel_bound: need 0 < t1 < t2");
  if (check_grid < 2) throw domain_error("heat_kernel_bound: check grid needs at least 2 points");
  const auto theta = detail::check_angles(check_grid);
  std::vector<double> h1(theta.size()), h2(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    h1[k] = heat_kernel(t1, theta[k]);
    h2[k] = heat_kernel(t2, theta[k]);
  }
  const double tm = s.theta_max();
  return detail::heat_bound_from_values(s.tau(), t1, t2, theta, h1, h2, heat_kernel(t1, 0.0), heat_kernel(t2, 0.0),
                                        heat_kernel(t1, tm), heat_kernel(t2, tm));
}

/// Spectral coefficients lambda (exp(-t1 l(l+1)) - delta exp(-t2 l(l+1))) of K.
inline double heat_bound_coefficient(const HeatBound& b, int l) {
  const double ll = l * (l + 1.0);
  return b.lambda * (std::exp(-b.t1 * ll) - b.delta * std::exp(-b.t2 * ll));
}

/// n points log-spaced on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g;
  for (std::size_t k = 0; k < n; ++k)
    g.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1.0)));
  return g;
}

/// Best dominated pair t1 < t2 from the grid; nullopt when no pair is dominated.
inline std::optional<HeatBound> optimize_heat_params(const Sphere& s, const std::vector<double>& t_grid,
                                                     std::size_t check_grid = 10000) {
  std::vector<double> ts;
  for (double t : t_grid)
    if (t > 0.0) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (ts.size() < 2) return std::nullopt;

  const auto theta = detail::check_angles(check_grid);
  const double tm = s.theta_max();
  std::vector<std::vector<double>> h(ts.size(), std::vector<double>(theta.size()));
  std::vector<double> h0(ts.size()), hmax(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t k = 0; k < theta.size(); ++k) h[i][k] = heat_kernel(ts[i], theta[k]);
    h0[i] = heat_kernel(ts[i], 0.0);
    hmax[i] = heat_kernel(ts[i], tm);
  }
  std::optional<HeatBound> best;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      const HeatBound b =
          detail::heat_bound_from_values(s.tau(), ts[i], ts[j], theta, h[i], h[j], h0[i], h0[j], hmax[i], hmax[j]);
      if (b.dominated && (!best || b.s_k > best->s_k)) best = b;
    }
  return best;
}

}  // namespace cvp
