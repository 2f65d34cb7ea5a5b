#pragma once

// Optimality checks for a candidate measure: the Euler-Lagrange conditions on a
// test grid, positivity of the support Gram matrix, generically-timelike
// classification and the low-order moments.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cvp/manifold.hpp"
#include "cvp/measure.hpp"
#include "cvp/spectral.hpp"
#include "cvp/weights.hpp"

namespace cvp {

enum class Classification { GenericallyTimelike, SingularCandidate, Unclassified };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::GenericallyTimelike: return "GenericallyTimelike";
    case Classification::SingularCandidate: return "SingularCandidate";
    case Classification::Unclassified: return "Unclassified";
  }
  return "?";
}

struct CertificateReport {
  double action = 0.0;
  double el_residual = 0.0;       ///< max_supp |ell - S| + max(0, S - min_grid ell)
  double support_deviation = 0.0; ///< first term of el_residual
  double grid_deficit = 0.0;      ///< second term of el_residual
  double gram_min_eig = 0.0;
  double gram_trace = 0.0;
  std::size_t support_size = 0;
  double dee_spread = 0.0;        ///< max - min of d over the test grid
  Classification classification = Classification::Unclassified;
  std::vector<double> moment_residuals;
  bool obstructed = false;        ///< a theorem rules out timelike minimizers at this tau
  bool consistent = true;         ///< false if classified timelike although obstructed
};

/// Deterministic test points: equispaced angles, a Fibonacci sphere, or seeded Haar samples.
inline std::vector<CirclePoint> test_grid(const Circle&, std::size_t n) {
  std::vector<CirclePoint> g;
  for (std::size_t k = 0; k < n; ++k) g.push_back({kTwoPi * (k + 0.5) / static_cast<double>(n)});
  return g;
}

inline std::vector<SpherePoint> test_grid(const Sphere&, std::size_t n) {
  std::vector<SpherePoint> g;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(k);
    g.push_back({Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z)});
  }
  return g;
}

inline std::vector<FlagPoint> test_grid(const Flag& fl, std::size_t n) {
  return n == 0 ? std::vector<FlagPoint>{} : sample_uniform(fl, n, 0x7e57'9e1dULL);
}

/// Smallest eigenvalue of (L(x_i, x_j)).
template <Manifold M>
double gram_min_eigenvalue(const M& model, std::span<const typename M::point_type> pts) {
  if (pts.empty()) throw usage_error("gram_min_eigenvalue: no points");
  const Eigen::MatrixXd g = gram_matrix<M>(model, pts);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// |∫ phi dρ| for the l = 1, 2 eigenfunctions.
inline std::vector<double> moment_residuals(const WeightedMeasure<Circle>& m) {
  std::vector<double> out;
  for (int n : {1, -1, 2, -2}) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.weights[i] * std::polar(1.0, n * m.points[i].angle);
    out.push_back(std::abs(s));
  }
  return out;
}

inline std::vector<double> moment_residuals(const WeightedMeasure<Sphere>& m) {
  const double r3 = std::sqrt(3.0), r15 = std::sqrt(15.0), r5 = std::sqrt(5.0);
  std::vector<double> s(8, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = m.points[i].v.x(), y = m.points[i].v.y(), z = m.points[i].v.z(), w = m.weights[i];
    const double phi[8] = {r3 * x, r3 * y, r3 * z, r15 * x * y, r15 * y * z, r15 * x * z,
                           0.5 * r5 * (3.0 * z * z - 1.0), 0.5 * r15 * (x * x - y * y)};
    for (int k = 0; k < 8; ++k) s[k] += w * phi[k];
  }
  for (double& v : s) v = std::abs(v);
  return s;
}

inline std::vector<double> moment_residuals(const WeightedMeasure<Flag>&) { return {}; }

namespace detail {
// Circle and sphere: antipodal points for tau > sqrt(2). Flag: tau above flag_gt_threshold.
template <Manifold M>
bool is_obstructed(const M& model) {
  if constexpr (ZonalManifold<M>)
    return antipodal_obstruction(model);
  else
    return model.tau() > flag_gt_threshold(model.f());
}
}  // namespace detail

/// tol is relative to 8 tau^2 and applies to both classification conditions.
template <Manifold M>
CertificateReport certify(const M& model, const WeightedMeasure<M>& m, std::size_t test_grid_size = 10000,
                          double tol = 1e-6) {
  validate(model, m, 1e-9);
  const double scale = kernel_scale(model);
  const WeightedMeasure<M> supp = m.support();
  CertificateReport r;
  r.action = action(model, m);
  r.support_size = supp.size();

  for (const auto& x : supp.points) r.support_deviation = std::max(r.support_deviation, std::abs(ell(model, m, x) - r.action));

  double min_ell = std::numeric_limits<double>::infinity();
  double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
  for (const auto& x : test_grid(model, test_grid_size)) {
    min_ell = std::min(min_ell, ell(model, m, x));
    const double d = dee(model, m, x);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  r.grid_deficit = test_grid_size ? std::max(0.0, r.action - min_ell) : 0.0;
  r.el_residual = r.support_deviation + r.grid_deficit;
  r.dee_spread = test_grid_size ? dmax - dmin : 0.0;

  const Eigen::MatrixXd g = gram_matrix<M>(model, supp.points);
  r.gram_trace = g.trace();
  r.gram_min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();

  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < supp.size(); ++i)
    for (std::size_t j = i + 1; j < supp.size(); ++j) min_d = std::min(min_d, model.kernel(supp.points[i], supp.points[j]));
  const bool pairs_ok = !(min_d < -tol * scale);
  if (pairs_ok && r.dee_spread <= tol * scale)
    r.classification = Classification::GenericallyTimelike;
  else if (!pairs_ok)
    r.classification = Classification::SingularCandidate;

  r.moment_residuals = moment_residuals(m);
  r.obstructed = detail::is_obstructed(model);
  r.consistent = !(r.obstructed && r.classification == Classification::GenericallyTimelike);
  return r;
}

}  // namespace cvp
