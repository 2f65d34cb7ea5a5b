#pragma once

// Probability measures on the manifolds: weighted counting measures (the
// optimization variable) and zonal densities against the volume measure,
// together with the action and the potentials ell and d.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "cvp/errors.hpp"
#include "cvp/manifold.hpp"
#include "cvp/quadrature.hpp"

namespace cvp {

template <Manifold M>
struct WeightedMeasure {
  using point_type = typename M::point_type;

  std::vector<point_type> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Points carrying strictly positive weight.
  WeightedMeasure support() const {
    WeightedMeasure out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (weights[i] > 0.0) {
        out.points.push_back(points[i]);
        out.weights.push_back(weights[i]);
      }
    }
    return out;
  }

  /// Equal weights 1/n on the given points.
  static WeightedMeasure uniform(std::vector<point_type> pts) {
    WeightedMeasure m;
    const double w = pts.empty() ? 0.0 : 1.0 / static_cast<double>(pts.size());
    m.weights.assign(pts.size(), w);
    m.points = std::move(pts);
    return m;
  }
};

/// Throws usage_error unless the measure is a valid probability measure on `model`.
template <Manifold M>
void validate(const M& model, const WeightedMeasure<M>& m, double sum_tol = 1e-12) {
  if (m.points.size() != m.weights.size())
    throw usage_error("measure: " + std::to_string(m.points.size()) + " points but " +
                      std::to_string(m.weights.size()) + " weights");
  if (m.empty()) throw usage_error("measure: no support points");
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m.weights[i] >= 0.0)) throw usage_error("measure: negative or NaN weight at index " + std::to_string(i));
    if (!model.is_valid(m.points[i])) throw usage_error("measure: point " + std::to_string(i) + " is not on the manifold");
    s += m.weights[i];
  }
  if (std::abs(s - 1.0) > sum_tol) throw usage_error("measure: weights sum to " + std::to_string(s));
}

/// Rescale weights to sum exactly to one (up to rounding of the final division).
template <Manifold M>
void renormalize(WeightedMeasure<M>& m) {
  double s = 0.0;
  for (double& w : m.weights) {
    w = std::max(0.0, w);
    s += w;
  }
  if (s > 0.0)
    for (double& w : m.weights) w /= s;
}

/// S = sum_ij w_i w_j L(x_i, x_j), diagonal included. Fixed summation order.
template <Manifold M>
double action(const M& model, const WeightedMeasure<M>& m) {
  const std::size_t n = m.size();
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diag += m.weights[i] * m.weights[i] * lagrangian(model, m.points[i], m.points[i]);
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) row += m.weights[j] * lagrangian(model, m.points[i], m.points[j]);
    off += m.weights[i] * row;
  }
  return diag + 2.0 * off;
}

/// ell(x) = sum_i w_i L(x, x_i).
template <Manifold M>
double ell(const M& model, const WeightedMeasure<M>& m, const typename M::point_type& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weights[i] * lagrangian(model, x, m.points[i]);
  return s;
}

/// d(x) = sum_i w_i D(x, x_i), no clamping.
template <Manifold M>
double dee(const M& model, const WeightedMeasure<M>& m, const typename M::point_type& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weights[i] * model.kernel(x, m.points[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Quadrature grids for integrals against the normalized volume measure.

template <Manifold M>
struct QuadratureGrid {
  std::vector<typename M::point_type> nodes;
  std::vector<double> weights;  ///< sum to one

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// n equally spaced nodes with weight 1/n (exact for trigonometric polynomials of degree < n).
inline QuadratureGrid<Circle> quadrature_grid(const Circle&, std::size_t n) {
  if (n == 0) throw domain_error("quadrature_grid: resolution must be positive");
  QuadratureGrid<Circle> g;
  for (std::size_t k = 0; k < n; ++k) {
    g.nodes.push_back({kTwoPi * static_cast<double>(k) / static_cast<double>(n)});
    g.weights.push_back(1.0 / static_cast<double>(n));
  }
  return g;
}

/// Gauss-Legendre in cos(theta) times uniform phi, weights normalized to one.
inline QuadratureGrid<Sphere> quadrature_grid(const Sphere&, std::size_t n_theta, std::size_t n_phi) {
  if (n_theta == 0 || n_phi == 0) throw domain_error("quadrature_grid: resolution must be positive");
  const GaussRule gl = gauss_legendre(n_theta);
  QuadratureGrid<Sphere> g;
  g.nodes.reserve(n_theta * n_phi);
  g.weights.reserve(n_theta * n_phi);
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (std::size_t k = 0; k < n_phi; ++k) {
      const double phi = kTwoPi * static_cast<double>(k) / static_cast<double>(n_phi);
      g.nodes.push_back({Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), c)});
      g.weights.push_back(0.5 * gl.weights[i] / static_cast<double>(n_phi));
    }
  }
  return g;
}

/// Default sphere resolution: n_theta x 2 n_theta.
inline QuadratureGrid<Sphere> quadrature_grid(const Sphere& s, std::size_t n_theta = 200) {
  return quadrature_grid(s, n_theta, 2 * n_theta);
}

// ---------------------------------------------------------------------------
// Zonal densities on S^2: f depends on the polar angle only and is piecewise
// constant between breakpoints, dρ = f dμ.

struct ZonalDensity {
  std::vector<double> edges;   ///< ascending polar angles, edges.front() == 0, edges.back() == pi
  std::vector<double> values;  ///< values[k] on [edges[k], edges[k+1]]

  static ZonalDensity uniform() { return {{0.0, std::numbers::pi}, {1.0}}; }

  std::size_t bands() const { return values.size(); }

  double value(double theta) const {
    for (std::size_t k = 0; k < values.size(); ++k)
      if (theta >= edges[k] && theta <= edges[k + 1]) return values[k];
    return 0.0;
  }

  /// Per-node values on a sphere grid (z axis is the symmetry axis).
  std::vector<double> expand_on(const QuadratureGrid<Sphere>& grid) const {
    std::vector<double> out;
    out.reserve(grid.nodes.size());
    for (const auto& p : grid.nodes) out.push_back(value(std::acos(std::clamp(p.v.z(), -1.0, 1.0))));
    return out;
  }

  /// ∫ f P_l(cos theta) dμ, exact: polynomial in cos(theta) on every band.
  double legendre_moment(int l) const {
    const GaussRule rule = gauss_legendre(static_cast<std::size_t>(l / 2 + 2));
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k] == 0.0) continue;
      const double c_lo = std::cos(edges[k + 1]), c_hi = std::cos(edges[k]);
      s += values[k] * integrate(rule, c_lo, c_hi, [l](double c) { return legendre(l, c); });
    }
    return 0.5 * s;
  }

  double mass() const { return legendre_moment(0); }
};

/// Throws usage_error unless edges/values are consistent, f >= 0 and ∫ f dμ = 1 within `tol`.
inline void validate(const ZonalDensity& d, double tol = 1e-8) {
  if (d.edges.size() != d.values.size() + 1 || d.values.empty())
    throw usage_error("density: need one more edge than band values");
  if (d.edges.front() != 0.0 || std::abs(d.edges.back() - std::numbers::pi) > 1e-15)
    throw usage_error("density: edges must span [0, pi]");
  for (std::size_t k = 0; k + 1 < d.edges.size(); ++k)
    if (!(d.edges[k] <= d.edges[k + 1])) throw usage_error("density: edges must ascend");
  for (double v : d.values)
    if (!(v >= 0.0)) throw usage_error("density: negative value");
  if (std::abs(d.mass() - 1.0) > tol) throw usage_error("density: not normalized, mass " + std::to_string(d.mass()));
}

namespace detail {

/// (1/2π) ∫_0^{2π} L(a + b cos φ) dφ in closed form; L is the positive part of the
/// quadratic D(u) = q0 + q1 u + q2 u^2 and is supported on u >= cos(theta_max).
inline double azimuthal_lagrangian(double tau, double a, double b) {
  const double t2 = tau * tau;
  const double q0 = 2.0 * t2 * (2.0 - t2), q1 = 4.0 * t2, q2 = 2.0 * t2 * t2;
  const double c_star = lightcone_cos(tau);
  const double alpha = q0 + q1 * a + q2 * a * a;
  const double beta = q1 * b + 2.0 * q2 * a * b;
  const double gamma = q2 * b * b;
  if (b <= 1e-300) return a >= c_star ? std::max(0.0, alpha) : 0.0;
  const double k = (c_star - a) / b;
  if (k <= -1.0) return alpha + 0.5 * gamma;
  if (k >= 1.0) return 0.0;
  const double phi = std::acos(k);
  const double s = std::sin(phi), c = std::cos(phi);
  return (alpha * phi + beta * s + 0.5 * gamma * (phi + s * c)) / std::numbers::pi;
}

inline double azimuthal_kernel(double tau, double a, double b) {
  const double t2 = tau * tau;
  const double q0 = 2.0 * t2 * (2.0 - t2), q1 = 4.0 * t2, q2 = 2.0 * t2 * t2;
  return q0 + q1 * a + q2 * (a * a + 0.5 * b * b);
}

/// Polar angles at which the inner integrand changes analytic form for a given theta_x.
inline void add_cone_breaks(std::vector<double>& out, double theta, double theta_max) {
  const double pi = std::numbers::pi;
  for (double t : {theta - theta_max, theta + theta_max, theta_max - theta, 2.0 * pi - theta_max - theta})
    if (t > 0.0 && t < pi) out.push_back(t);
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > 1e-14) out.push_back(x);
  return out;
}

/// ∫ g dμ for zonal g supported where f > 0, split at `breaks`: ½ ∫ f(θ) g(θ) sinθ dθ.
template <class G>
double zonal_integral(const ZonalDensity& f, const std::vector<double>& breaks, const GaussRule& rule, G&& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (f.values[k] == 0.0 || f.edges[k + 1] <= f.edges[k]) continue;
    std::vector<double> cuts{f.edges[k], f.edges[k + 1]};
    for (double b : breaks)
      if (b > f.edges[k] && b < f.edges[k + 1]) cuts.push_back(b);
    cuts = sorted_unique(std::move(cuts));
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
      s += f.values[k] *
             integrate_graded(rule, cuts[j], cuts[j + 1], [&](double th) { return g(th) * std::sin(th); });
  }
  return 0.5 * s;
}

}  // namespace detail

/// ell(x) = ∫ L(x, y) f(y) dμ(y) for x at polar angle theta (independent of azimuth).
inline double density_ell(const Sphere& model, const ZonalDensity& f, double theta_x, std::size_t nodes = 64) {
  const GaussRule rule = gauss_legendre(nodes);
  std::vector<double> breaks;
  detail::add_cone_breaks(breaks, theta_x, model.theta_max());
  const double cx = std::cos(theta_x), sx = std::sin(theta_x);
  return detail::zonal_integral(f, breaks, rule, [&](double th) {
    return detail::azimuthal_lagrangian(model.tau(), cx * std::cos(th), sx * std::sin(th));
  });
}

/// d(x) = ∫ D(x, y) f(y) dμ(y); D is a polynomial so a short rule is exact.
inline double density_dee(const Sphere& model, const ZonalDensity& f, double theta_x) {
  const GaussRule rule = gauss_legendre(8);
  const double cx = std::cos(theta_x), sx = std::sin(theta_x);
  double s = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (f.values[k] == 0.0) continue;
    const double c_lo = std::cos(f.edges[k + 1]), c_hi = std::cos(f.edges[k]);
    s += f.values[k] * integrate(rule, c_lo, c_hi, [&](double c) {
      return detail::azimuthal_kernel(model.tau(), cx * c, sx * std::sqrt(std::max(0.0, 1.0 - c * c)));
    });
  }
  return 0.5 * s;
}

/// S[f μ] = ∬ L f f dμ dμ. The azimuthal integral is done in closed form and both
/// polar integrals are split wherever the lightcone boundary meets a band edge.
inline double density_action(const Sphere& model, const ZonalDensity& f, std::size_t nodes = 64) {
  const GaussRule rule = gauss_legendre(nodes);
  const double tm = model.theta_max();
  std::vector<double> outer;
  for (double e : f.edges) {
    outer.push_back(e);
    detail::add_cone_breaks(outer, e, tm);
  }
  outer = detail::sorted_unique(std::move(outer));
  return detail::zonal_integral(f, outer, rule, [&](double th) { return density_ell(model, f, th, nodes); });
}

/// Closed form of the volume-measure action for tau >= 1.
inline double volume_action(double tau) { return 4.0 - 4.0 / (3.0 * tau * tau); }

}  // namespace cvp
