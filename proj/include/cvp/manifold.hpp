#pragma once

// The three compact manifolds (circle, sphere, flag manifold F^{1,2}(C^f)),
// their point types, and the kernel D with its positive part L = max(0, D).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cvp/errors.hpp"
#include "cvp/rng.hpp"

namespace cvp {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Causal { Timelike, Lightlike, Spacelike };

inline const char* to_string(Causal c) {
  switch (c) {
    case Causal::Timelike: return "timelike";
    case Causal::Lightlike: return "lightlike";
    case Causal::Spacelike: return "spacelike";
  }
  return "?";
}

struct CirclePoint {
  double angle = 0.0;  ///< radians in [0, 2pi)
};

struct SpherePoint {
  Eigen::Vector3d v = Eigen::Vector3d::UnitZ();
};

/// Orthonormal pair (u, v) in C^f standing for x = (1+tau)|u><u| + (1-tau)|v><v|.
struct FlagPoint {
  Eigen::VectorXcd u;
  Eigen::VectorXcd v;
};

inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

/// D on the circle and the sphere as a function of c = <x, y>.
inline double zonal_kernel(double tau, double c) {
  const double t2 = tau * tau;
  return 2.0 * t2 * (1.0 + c) * (2.0 - t2 * (1.0 - c));
}

/// cos(theta_max) = 1 - 2/tau^2, the lightcone boundary in terms of <x, y>.
inline double lightcone_cos(double tau) { return 1.0 - 2.0 / (tau * tau); }

namespace detail {

inline void require_zonal_tau(double tau) {
  if (!(tau >= 1.0) || !std::isfinite(tau))
    throw domain_error("coupling tau must satisfy tau >= 1, got " + std::to_string(tau));
}

inline Eigen::VectorXcd complex_gaussian(Eigen::Index f, CounterRng& rng) {
  Eigen::VectorXcd z(f);
  for (Eigen::Index i = 0; i < f; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    z[i] = {re, im};
  }
  return z;
}

}  // namespace detail

// ---------------------------------------------------------------------------

class Circle {
 public:
  using point_type = CirclePoint;
  static constexpr const char* name = "circle";

  explicit Circle(double tau) : tau_(tau) { detail::require_zonal_tau(tau); }

  double tau() const { return tau_; }
  Circle with_tau(double tau) const { return Circle(tau); }
  double theta_max() const { return std::acos(lightcone_cos(tau_)); }

  static double inner(const CirclePoint& x, const CirclePoint& y) {
    return std::cos(std::abs(x.angle - y.angle));
  }

  double kernel(const CirclePoint& x, const CirclePoint& y) const {
    return zonal_kernel(tau_, inner(x, y));
  }

  CirclePoint sample(CounterRng& rng) const { return {kTwoPi * rng.uniform()}; }

  CirclePoint jitter(const CirclePoint& p, double scale, CounterRng& rng) const {
    return {wrap_angle(p.angle + scale * rng.normal())};
  }

  double distance(const CirclePoint& x, const CirclePoint& y) const {
    const double d = std::abs(wrap_angle(x.angle) - wrap_angle(y.angle));
    return std::min(d, kTwoPi - d);
  }

  CirclePoint centroid(std::span<const CirclePoint> pts, std::span<const double> w) const {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s += w[i] * std::sin(pts[i].angle);
      c += w[i] * std::cos(pts[i].angle);
    }
    return {wrap_angle(std::atan2(s, c))};
  }

  bool is_valid(const CirclePoint& p) const { return std::isfinite(p.angle); }

 private:
  double tau_;
};

// ---------------------------------------------------------------------------

class Sphere {
 public:
  using point_type = SpherePoint;
  static constexpr const char* name = "sphere";

  explicit Sphere(double tau) : tau_(tau) { detail::require_zonal_tau(tau); }

  double tau() const { return tau_; }
  Sphere with_tau(double tau) const { return Sphere(tau); }
  double theta_max() const { return std::acos(lightcone_cos(tau_)); }

  static double inner(const SpherePoint& x, const SpherePoint& y) {
    return std::clamp(x.v.dot(y.v), -1.0, 1.0);
  }

  double kernel(const SpherePoint& x, const SpherePoint& y) const {
    return zonal_kernel(tau_, inner(x, y));
  }

  SpherePoint sample(CounterRng& rng) const {
    Eigen::Vector3d g;
    do {
      g = {rng.normal(), rng.normal(), rng.normal()};
    } while (g.squaredNorm() < 1e-24);
    return {g.normalized()};
  }

  /// Exponential-map step along a Gaussian tangent vector of typical length `scale`.
  SpherePoint jitter(const SpherePoint& p, double scale, CounterRng& rng) const {
    Eigen::Vector3d g{rng.normal(), rng.normal(), rng.normal()};
    Eigen::Vector3d t = scale * (g - g.dot(p.v) * p.v) / std::sqrt(2.0);
    const double len = t.norm();
    if (len < 1e-300) return p;
    Eigen::Vector3d q = std::cos(len) * p.v + std::sin(len) * (t / len);
    return {q.normalized()};
  }

  double distance(const SpherePoint& x, const SpherePoint& y) const {
    return std::atan2(x.v.cross(y.v).norm(), x.v.dot(y.v));
  }

  SpherePoint centroid(std::span<const SpherePoint> pts, std::span<const double> w) const {
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) s += w[i] * pts[i].v;
    if (s.norm() < 1e-300) return pts.front();
    return {s.normalized()};
  }

  bool is_valid(const SpherePoint& p) const { return std::abs(p.v.norm() - 1.0) <= 1e-12; }

 private:
  double tau_;
};

// ---------------------------------------------------------------------------

/// Gram-Schmidt on (u, v); the result satisfies the FlagPoint invariants.
inline FlagPoint orthonormalize(Eigen::VectorXcd u, Eigen::VectorXcd v) {
  u.normalize();
  v -= u.dot(v) * u;  // Eigen's dot is conjugate-linear in the first argument
  v.normalize();
  return {std::move(u), std::move(v)};
}

inline double flag_orthonormality_defect(const FlagPoint& p) {
  return std::max({std::abs(p.u.norm() - 1.0), std::abs(p.v.norm() - 1.0), std::abs(p.u.dot(p.v))});
}

/// Re-orthonormalize only if the pair drifted by more than 1e-12.
inline FlagPoint make_flag_point(Eigen::VectorXcd u, Eigen::VectorXcd v) {
  if (u.size() != v.size()) throw usage_error("flag point: u and v differ in dimension");
  FlagPoint p{std::move(u), std::move(v)};
  if (flag_orthonormality_defect(p) > 1e-12) p = orthonormalize(std::move(p.u), std::move(p.v));
  return p;
}

class Flag {
 public:
  using point_type = FlagPoint;
  static constexpr const char* name = "flag";

  Flag(int f, double tau) : f_(f), tau_(tau) {
    if (f < 3) throw domain_error("flag manifold needs f >= 3, got " + std::to_string(f));
    if (!(tau >= 1.0) || !std::isfinite(tau))
      throw domain_error("coupling tau must satisfy tau >= 1, got " + std::to_string(tau));
  }

  int f() const { return f_; }
  double tau() const { return tau_; }
  Flag with_tau(double tau) const { return Flag(f_, tau); }

  /// <a, b> = sum conj(a_i) b_i in a fixed order, so <b, a> == conj(<a, b>) exactly.
  static std::complex<double> inner(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    std::complex<double> s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
  }

  /// Tr(xy) = sum_ij a_i a_j |<p_i, q_j>|^2 with (a_0, a_1) = (1+tau, 1-tau).
  double trace_product(const FlagPoint& x, const FlagPoint& y) const {
    const double a0 = 1.0 + tau_, a1 = 1.0 - tau_;
    const double n00 = std::norm(inner(x.u, y.u));
    const double n01 = std::norm(inner(x.u, y.v));
    const double n10 = std::norm(inner(x.v, y.u));
    const double n11 = std::norm(inner(x.v, y.v));
    const double cross = a0 * a1;
    return a0 * a0 * n00 + a1 * a1 * n11 + (cross * n01 + cross * n10);
  }

  /// D = Tr((xy)^2) - (Tr xy)^2 / 2 through the 2x2 reduction
  /// M = A C B C^*, C_ij = <p_i, q_j>:  D = (Tr M)^2 / 2 - 2 det M.
  /// The evaluation order is symmetric, so kernel(x, y) == kernel(y, x) bit for bit.
  double kernel(const FlagPoint& x, const FlagPoint& y) const {
    const std::complex<double> c00 = inner(x.u, y.u), c01 = inner(x.u, y.v);
    const std::complex<double> c10 = inner(x.v, y.u), c11 = inner(x.v, y.v);
    const double a0 = 1.0 + tau_, a1 = 1.0 - tau_;
    const double cross = a0 * a1;
    const double t = a0 * a0 * std::norm(c00) + a1 * a1 * std::norm(c11) +
                     (cross * std::norm(c01) + cross * std::norm(c10));
    const double det_c = std::norm(c00 * c11 - c01 * c10);
    return 0.5 * t * t - 2.0 * cross * cross * det_c;
  }

  /// Haar sample: two complex Gaussian vectors, orthonormalized.
  FlagPoint sample(CounterRng& rng) const {
    for (;;) {
      Eigen::VectorXcd u = detail::complex_gaussian(f_, rng);
      Eigen::VectorXcd v = detail::complex_gaussian(f_, rng);
      if (u.norm() < 1e-12) continue;
      Eigen::VectorXcd w = v - (u.dot(v) / u.squaredNorm()) * u;
      if (w.norm() < 1e-12) continue;
      return orthonormalize(std::move(u), std::move(w));
    }
  }

  FlagPoint jitter(const FlagPoint& p, double scale, CounterRng& rng) const {
    const double s = scale / std::sqrt(2.0 * f_);
    Eigen::VectorXcd u = p.u + s * detail::complex_gaussian(f_, rng);
    Eigen::VectorXcd v = p.v + s * detail::complex_gaussian(f_, rng);
    return orthonormalize(std::move(u), std::move(v));
  }

  /// Chordal distance ||x - y||_F / sqrt(2 + 2 tau^2); approximately the rotation
  /// angle of u for small moves.
  double distance(const FlagPoint& x, const FlagPoint& y) const {
    const double tr_sq = 2.0 + 2.0 * tau_ * tau_;  // Tr(x^2)
    const double d2 = std::max(0.0, 2.0 * tr_sq - 2.0 * trace_product(x, y));
    return std::sqrt(d2 / tr_sq);
  }

  /// Phase-aligned weighted mean of the (u, v) pairs, re-orthonormalized.
  FlagPoint centroid(std::span<const FlagPoint> pts, std::span<const double> w) const {
    const FlagPoint& ref = pts.front();
    Eigen::VectorXcd su = Eigen::VectorXcd::Zero(f_), sv = Eigen::VectorXcd::Zero(f_);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      su += w[i] * phase_to(ref.u, pts[i].u);
      sv += w[i] * phase_to(ref.v, pts[i].v);
    }
    if (su.norm() < 1e-300 || sv.norm() < 1e-300) return ref;
    return orthonormalize(std::move(su), std::move(sv));
  }

  bool is_valid(const FlagPoint& p) const {
    return p.u.size() == f_ && p.v.size() == f_ && flag_orthonormality_defect(p) <= 1e-10;
  }

 private:
  static Eigen::VectorXcd phase_to(const Eigen::VectorXcd& ref, const Eigen::VectorXcd& z) {
    const std::complex<double> ip = z.dot(ref);
    const double a = std::abs(ip);
    return a > 0.0 ? Eigen::VectorXcd(z * (ip / a)) : z;
  }

  int f_;
  double tau_;
};

// ---------------------------------------------------------------------------

template <class M>
concept Manifold = requires(const M& m, const typename M::point_type& p, CounterRng& rng,
                            std::span<const typename M::point_type> pts, std::span<const double> w) {
  { m.tau() } -> std::convertible_to<double>;
  { m.with_tau(1.0) } -> std::same_as<M>;
  { m.kernel(p, p) } -> std::convertible_to<double>;
  { m.sample(rng) } -> std::same_as<typename M::point_type>;
  { m.jitter(p, 0.1, rng) } -> std::same_as<typename M::point_type>;
  { m.distance(p, p) } -> std::convertible_to<double>;
  { m.centroid(pts, w) } -> std::same_as<typename M::point_type>;
  { m.is_valid(p) } -> std::convertible_to<bool>;
};

template <class M>
concept ZonalManifold = Manifold<M> && (std::same_as<M, Circle> || std::same_as<M, Sphere>);

/// D(x, x) = 8 tau^2 on every model; the natural scale of all kernel values.
template <Manifold M>
double kernel_scale(const M& model) {
  return 8.0 * model.tau() * model.tau();
}

template <Manifold M>
double d_kernel(const M& model, const typename M::point_type& x, const typename M::point_type& y) {
  return model.kernel(x, y);
}

template <Manifold M>
double lagrangian(const M& model, const typename M::point_type& x, const typename M::point_type& y) {
  return std::max(0.0, model.kernel(x, y));
}

template <ZonalManifold M>
double theta_max(const M& model) {
  return model.theta_max();
}

/// |D| <= tol * 8 tau^2 counts as lightlike.
template <Manifold M>
Causal causal_relation(const M& model, const typename M::point_type& x,
                       const typename M::point_type& y, double tol = 1e-12) {
  if (tol < 0.0) throw domain_error("causal_relation: tol must be non-negative");
  const double d = model.kernel(x, y);
  const double band = tol * kernel_scale(model);
  if (std::abs(d) <= band) return Causal::Lightlike;
  return d > 0.0 ? Causal::Timelike : Causal::Spacelike;
}

/// n i.i.d. uniform (Haar) points; one generator stream per seed.
template <Manifold M>
std::vector<typename M::point_type> sample_uniform(const M& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw domain_error("sample_uniform: n must be >= 1");
  CounterRng rng(seed, 0);
  std::vector<typename M::point_type> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(model.sample(rng));
  return out;
}

inline SpherePoint sphere_point(double x, double y, double z) {
  return {Eigen::Vector3d(x, y, z).normalized()};
}

}  // namespace cvp
