#pragma once

// Closed-form measures: circle chains and regular polygons, the six-point octahedron,
// the three-band zonal density, and the flag-manifold pair whose Gram matrix is
// indefinite.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cvp/errors.hpp"
#include "cvp/manifold.hpp"
#include "cvp/measure.hpp"

namespace cvp {

/// Below this coupling the chain theorem is not available.
inline double circle_tau_d() { return std::sqrt(3.0 + std::sqrt(10.0)); }

/// Smallest n with n >= 2 pi / theta_max. A relative slack of 1e-12 keeps
/// tau = tau_m from rounding up to m + 1.
inline int circle_m0(double tau) {
  const double ratio = kTwoPi / Circle(tau).theta_max();
  return static_cast<int>(std::ceil(ratio * (1.0 - 1e-12)));
}

/// Coupling at which m0 jumps to m.
inline double circle_tau_m(int m) {
  if (m < 3) throw domain_error("circle_tau_m: m must be >= 3, got " + std::to_string(m));
  return std::sqrt(2.0 / (1.0 - std::cos(kTwoPi / m)));
}

/// x_k = exp(i (k-1) theta_max), k = 1..n, equal weights.
inline WeightedMeasure<Circle> circle_chain(double tau, int n) {
  if (n < 1) throw domain_error("circle_chain: n must be >= 1");
  const double tm = Circle(tau).theta_max();
  std::vector<CirclePoint> pts;
  for (int k = 0; k < n; ++k) pts.push_back({wrap_angle(k * tm)});
  return WeightedMeasure<Circle>::uniform(std::move(pts));
}

struct ChainMinimizer {
  int m0 = 0;
  double gamma = 0.0;   ///< angle between x_1 and x_{m0}
  double lambda = 0.0;  ///< closed-form minimal action
  WeightedMeasure<Circle> measure;
  double action = 0.0;  ///< action of `measure`, evaluated directly
};

/// The chain minimizer with its closed-form weights. Refuses below tau_d unless `force`.
inline ChainMinimizer circle_chain_minimizer(double tau, bool force = false) {
  if (!force && !(tau > circle_tau_d()))
    throw hypothesis_error("circle_chain_minimizer: needs tau > sqrt(3 + sqrt(10)) = " +
                           std::to_string(circle_tau_d()) + ", got " + std::to_string(tau));
  const Circle c(tau);
  ChainMinimizer out;
  out.m0 = circle_m0(tau);
  out.gamma = kTwoPi - (out.m0 - 1) * c.theta_max();
  const double l0 = zonal_kernel(tau, 1.0);
  const double lg = std::max(0.0, zonal_kernel(tau, std::cos(out.gamma)));
  out.lambda = l0 * (l0 + lg) / ((out.m0 - 2) * (l0 + lg) + 2.0 * l0);
  out.measure = circle_chain(tau, out.m0);
  for (int k = 0; k < out.m0; ++k)
    out.measure.weights[k] = (k == 0 || k == out.m0 - 1) ? out.lambda / (l0 + lg) : out.lambda / l0;
  out.action = action(c, out.measure);
  return out;
}

/// m equally spaced points with equal weights.
inline WeightedMeasure<Circle> circle_uniform(int m) {
  if (m < 1) throw domain_error("circle_uniform: m must be >= 1");
  std::vector<CirclePoint> pts;
  for (int k = 0; k < m; ++k) pts.push_back({kTwoPi * k / m});
  return WeightedMeasure<Circle>::uniform(std::move(pts));
}

/// +-e_1, +-e_2, +-e_3 with weights 1/6.
inline WeightedMeasure<Sphere> octahedron() {
  std::vector<SpherePoint> pts;
  for (int i = 0; i < 3; ++i)
    for (double s : {1.0, -1.0}) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      v[i] = s;
      pts.push_back({v});
    }
  return WeightedMeasure<Sphere>::uniform(std::move(pts));
}

/// Piecewise constant density in the polar angle with vanishing l = 1, 2 moments.
inline ZonalDensity ex61_density() {
  const double pi = std::numbers::pi;
  return {{0.0, std::acos(0.8), std::acos(0.4), std::acos(0.2), std::acos(-0.5), std::acos(-0.7), pi},
          {5.0 / 3.0, 0.0, 35.0 / 9.0, 0.0, 40.0 / 9.0, 0.0}};
}

struct FlagWitness {
  FlagPoint x1, x2;
  double g = 0.0;  ///< closed-form off-diagonal entry
  Eigen::Matrix2d gram;
  double det = 0.0;
};

/// x1 from (e1, e2), x2 from (e1, sqrt(eps) e2 + sqrt(1 - eps) e3). For small eps the
/// 2x2 matrix of D values has negative determinant.
inline FlagWitness flag_negative_witness(int f, double tau, double eps) {
  if (f < 3) throw domain_error("flag_negative_witness: f must be >= 3");
  if (!(tau > 1.0)) throw domain_error("flag_negative_witness: tau must be > 1");
  if (!(eps > 0.0 && eps < 1.0)) throw domain_error("flag_negative_witness: eps must lie in (0, 1)");
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(f), e2 = e1, e3 = e1;
  e1[0] = 1.0;
  e2[1] = 1.0;
  e3[2] = 1.0;
  FlagWitness w;
  w.x1 = make_flag_point(e1, e2);
  w.x2 = make_flag_point(e1, std::sqrt(eps) * e2 + std::sqrt(1.0 - eps) * e3);
  const double a = (tau + 1.0) * (tau + 1.0) - eps * (tau - 1.0) * (tau - 1.0);
  w.g = 0.5 * a * a;
  const double diag = 8.0 * tau * tau;
  w.gram << diag, w.g, w.g, diag;
  w.det = diag * diag - w.g * w.g;
  return w;
}

}  // namespace cvp
