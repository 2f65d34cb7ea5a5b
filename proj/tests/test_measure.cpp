#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cvp/measure.hpp"
#include "oracles.hpp"

using namespace cvp;

namespace {

WeightedMeasure<Sphere> six_axes() {
  std::vector<SpherePoint> pts;
  for (int i = 0; i < 3; ++i)
    for (double s : {1.0, -1.0}) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      v[i] = s;
      pts.push_back({v});
    }
  return WeightedMeasure<Sphere>::uniform(pts);
}

WeightedMeasure<Circle> regular_polygon(int m) {
  std::vector<CirclePoint> pts;
  for (int k = 0; k < m; ++k) pts.push_back({2 * std::numbers::pi * k / m});
  return WeightedMeasure<Circle>::uniform(pts);
}

// The three-band profile whose l = 0, 1, 2 moments are (1, 0, 0).
ZonalDensity three_bands() {
  return {{0.0, std::acos(0.8), std::acos(0.4), std::acos(0.2), std::acos(-0.5), std::acos(-0.7), std::numbers::pi},
          {5.0 / 3.0, 0.0, 35.0 / 9.0, 0.0, 40.0 / 9.0, 0.0}};
}

double sphere_nu0(double tau) { return 4 * tau * tau - 4.0 / 3.0 * std::pow(tau, 4); }

}  // namespace

TEST(Action, SixAxes) {
  Sphere s(1.2);
  const auto m = six_axes();
  EXPECT_NEAR(action(s, m), 2.9952, 1e-12);
  EXPECT_NEAR(ell(s, m, {Eigen::Vector3d::UnitX()}), 2.9952, 1e-12);
}

TEST(Action, SinglePoint) {
  Sphere s(1.7);
  WeightedMeasure<Sphere> m{{sphere_point(1, 2, 3)}, {1.0}};
  EXPECT_DOUBLE_EQ(action(s, m), 8 * 1.7 * 1.7);
  EXPECT_DOUBLE_EQ(ell(s, m, m.points[0]), 8 * 1.7 * 1.7);
  EXPECT_DOUBLE_EQ(dee(s, m, m.points[0]), 8 * 1.7 * 1.7);
}

TEST(Action, SquareOnCircle) {
  Circle c(1.3);
  EXPECT_NEAR(action(c, regular_polygon(4)), 4 * 1.69 - 1.69 * 1.69, 1e-12);
}

TEST(Dee, ConstantForSixAxes) {
  for (double tau : {1.0, 1.2, std::sqrt(2.0)}) {
    Sphere s(tau);
    const auto m = six_axes();
    for (const auto& x : sample_uniform(s, 500, 4)) EXPECT_NEAR(dee(s, m, x), sphere_nu0(tau), 1e-12);
  }
}

TEST(Dee, ConstantForPolygon) {
  for (int m : {3, 5, 8}) {
    Circle c(1.1);
    const auto meas = regular_polygon(m);
    for (const auto& x : sample_uniform(c, 100, 2)) EXPECT_NEAR(dee(c, meas, x), 4 * 1.21 - 1.21 * 1.21, 1e-12);
  }
}

TEST(Action, EqualsWeightedEll) {
  Sphere s(1.8);
  CounterRng rng(7, 0);
  WeightedMeasure<Sphere> m;
  for (int i = 0; i < 40; ++i) {
    m.points.push_back(s.sample(rng));
    m.weights.push_back(rng.uniform());
  }
  renormalize(m);
  double via_ell = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) via_ell += m.weights[i] * ell(s, m, m.points[i]);
  EXPECT_NEAR(action(s, m), via_ell, 1e-12 * via_ell);
}

TEST(Action, PermutationAndRotationInvariant) {
  std::mt19937_64 gen(5);
  Sphere s(1.5);
  CounterRng rng(8, 0);
  WeightedMeasure<Sphere> m;
  for (int i = 0; i < 25; ++i) {
    m.points.push_back(s.sample(rng));
    m.weights.push_back(rng.uniform());
  }
  renormalize(m);
  const double a = action(s, m);
  auto p = m;
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), gen);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    p.points[i] = m.points[idx[i]];
    p.weights[i] = m.weights[idx[i]];
  }
  EXPECT_NEAR(action(s, p), a, 1e-10);
  const Eigen::Matrix3d r = oracle::random_rotation(gen);
  for (auto& q : p.points) q.v = r * q.v;
  EXPECT_NEAR(action(s, p), a, 1e-10);

  Flag fl(3, 1.5);
  WeightedMeasure<Flag> fm;
  for (int i = 0; i < 10; ++i) {
    fm.points.push_back(fl.sample(rng));
    fm.weights.push_back(0.1);
  }
  const double fa = action(fl, fm);
  const oracle::Mat u = oracle::random_unitary(3, gen);
  for (auto& q : fm.points) q = {u * q.u, u * q.v};
  EXPECT_NEAR(action(fl, fm), fa, 1e-10);
}

TEST(Action, BitIdenticalRepeats) {
  Flag fl(4, 2.0);
  WeightedMeasure<Flag> m;
  m.points = sample_uniform(fl, 30, 1);
  m.weights.assign(30, 1.0 / 30);
  EXPECT_EQ(action(fl, m), action(fl, m));
}

TEST(Validate, RejectsBadMeasures) {
  Sphere s(1.0);
  WeightedMeasure<Sphere> m{{sphere_point(1, 0, 0)}, {0.5}};
  EXPECT_THROW(validate(s, m), usage_error);
  m.weights = {1.0, 0.0};
  EXPECT_THROW(validate(s, m), usage_error);
  m.weights = {1.0};
  m.points[0].v = {2, 0, 0};
  EXPECT_THROW(validate(s, m), usage_error);
  m.points[0].v = {1, 0, 0};
  EXPECT_NO_THROW(validate(s, m));
}

TEST(Grid, SphereNormalizationAndSymmetry) {
  const auto g = quadrature_grid(Sphere(1.0), 200, 400);
  EXPECT_NEAR(g.integrate([](const SpherePoint&) { return 1.0; }), 1.0, 1e-13);
  EXPECT_NEAR(g.integrate([](const SpherePoint& p) { return p.v.z(); }), 0.0, 1e-12);
}

TEST(Grid, SphereReproducesEigenvalue) {
  Sphere s(1.5);
  const auto g = quadrature_grid(s, 200, 400);
  const SpherePoint x = sphere_point(0.2, 0.5, -0.7);
  EXPECT_NEAR(g.integrate([&](const SpherePoint& y) { return s.kernel(x, y); }), 2.25, 1e-8);
}

TEST(Grid, CircleUniform) {
  Circle c(1.2);
  const auto g = quadrature_grid(c, 64);
  EXPECT_EQ(g.nodes.size(), 64u);
  EXPECT_NEAR(g.integrate([&](const CirclePoint& y) { return c.kernel({0.4}, y); }), 4 * 1.44 - 1.44 * 1.44, 1e-12);
}

TEST(Density, UniformActionClosedForm) {
  for (double tau : {1.0, 1.5, 2.0, 3.0}) {
    Sphere s(tau);
    EXPECT_NEAR(density_action(s, ZonalDensity::uniform()), volume_action(tau), 1e-6) << tau;
  }
  EXPECT_NEAR(volume_action(1.0), 8.0 / 3.0, 1e-15);
  EXPECT_NEAR(volume_action(2.0), 11.0 / 3.0, 1e-15);
}

TEST(Density, UniformEllIsConstant) {
  Sphere s(2.2);
  for (double th : {0.0, 0.3, 1.0, 2.0, 3.1})
    EXPECT_NEAR(density_ell(s, ZonalDensity::uniform(), th), volume_action(2.2), 1e-9);
}

TEST(Density, ThreeBandMomentsAgainstOracle) {
  const ZonalDensity f = three_bands();
  EXPECT_NO_THROW(validate(f));
  for (int l = 0; l <= 4; ++l) {
    const double ref = oracle::band_moment(f.edges, f.values, [l](double c) { return std::legendre(l, c); });
    EXPECT_NEAR(f.legendre_moment(l), ref, 1e-10) << l;
  }
  EXPECT_NEAR(f.mass(), 1.0, 1e-12);
  EXPECT_NEAR(f.legendre_moment(1), 0.0, 1e-12);
  EXPECT_NEAR(f.legendre_moment(2), 0.0, 1e-12);
}

TEST(Density, ThreeBandDeeConstantAndAction) {
  const double tau = 1.001;
  Sphere s(tau);
  const ZonalDensity f = three_bands();
  for (double th : {0.0, 0.5, 1.5, 2.5, 3.0}) EXPECT_NEAR(density_dee(s, f, th), sphere_nu0(tau), 1e-12);
  EXPECT_NEAR(density_action(s, f), sphere_nu0(tau), 1e-6);
}

TEST(Density, GridExpansionMatchesMoments) {
  const ZonalDensity f = three_bands();
  const auto g = quadrature_grid(Sphere(1.0), 200, 8);
  const auto vals = f.expand_on(g);
  double mass = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) mass += g.weights[i] * vals[i];
  EXPECT_NEAR(mass, 1.0, 2e-2);  // tensor grid does not resolve the band edges
}

TEST(Density, ValidateRejects) {
  EXPECT_THROW(validate(ZonalDensity{{0.0, std::numbers::pi}, {2.0}}), usage_error);
  EXPECT_THROW(validate(ZonalDensity{{0.0, std::numbers::pi}, {-1.0}}), usage_error);
  EXPECT_THROW(validate(ZonalDensity{{0.0, 1.0}, {1.0}}), usage_error);
}
