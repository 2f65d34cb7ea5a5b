#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cvp/exact.hpp"
#include "cvp/weights.hpp"

using namespace cvp;

TEST(OptimalWeights, ReproducesChainWeights) {
  for (double tau : {2.6, 3.0, 4.0}) {
    const ChainMinimizer ch = circle_chain_minimizer(tau);
    const auto sol = optimal_weights<Circle>(Circle(tau), ch.measure.points);
    ASSERT_EQ(sol.weights.size(), ch.measure.weights.size());
    for (std::size_t i = 0; i < sol.weights.size(); ++i) EXPECT_NEAR(sol.weights[i], ch.measure.weights[i], 1e-12);
    EXPECT_NEAR(sol.lambda, ch.lambda, 1e-12);
    EXPECT_LT(sol.kkt_residual, 1e-9);
  }
}

TEST(OptimalWeights, SpacelikePointsGetEqualWeights) {
  const Sphere s(2.0);
  const auto oct = octahedron();
  const auto sol = optimal_weights<Sphere>(s, oct.points);
  for (double w : sol.weights) EXPECT_NEAR(w, 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(sol.lambda, 32.0 / 6.0, 1e-12);
}

TEST(OptimalWeights, CoincidentPoints) {
  const Circle c(1.5);
  const std::vector<CirclePoint> pts{{1.0}, {1.0}};
  const auto sol = optimal_weights<Circle>(c, pts);
  EXPECT_NEAR(sol.weights[0] + sol.weights[1], 1.0, 1e-15);
  EXPECT_GE(sol.weights[0], 0.0);
  EXPECT_GE(sol.weights[1], 0.0);
  EXPECT_NEAR(sol.lambda, 8 * 2.25, 1e-12);
  EXPECT_LT(sol.kkt_residual, 1e-9);
}

TEST(OptimalWeights, SinglePoint) {
  const Sphere s(1.3);
  const std::vector<SpherePoint> pts{sphere_point(0, 0, 1)};
  const auto sol = optimal_weights<Sphere>(s, pts);
  EXPECT_EQ(sol.weights[0], 1.0);
  EXPECT_THROW(optimal_weights<Sphere>(s, std::vector<SpherePoint>{}), usage_error);
}

TEST(OptimalWeights, KktOnRandomConfigurations) {
  for (double tau : {1.1, 1.6, 2.5}) {
    const Sphere s(tau);
    const Flag fl(3, tau);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto pts = sample_uniform(s, 5 + seed % 30, seed);
      const auto sol = optimal_weights<Sphere>(s, pts);
      EXPECT_LT(sol.kkt_residual, 1e-9) << tau << " " << seed;
      EXPECT_NEAR(std::accumulate(sol.weights.begin(), sol.weights.end(), 0.0), 1.0, 1e-14);
      for (double w : sol.weights) EXPECT_GE(w, 0.0);
      const auto fpts = sample_uniform(fl, 4 + seed % 12, seed);
      EXPECT_LT(optimal_weights<Flag>(fl, fpts).kkt_residual, 1e-9) << "flag " << tau << " " << seed;
    }
  }
}

TEST(OptimalWeights, NotWorseThanUniform) {
  const Circle c(1.8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = sample_uniform(c, 12, seed);
    const auto sol = optimal_weights<Circle>(c, pts);
    WeightedMeasure<Circle> u = WeightedMeasure<Circle>::uniform(pts);
    EXPECT_LE(sol.lambda, action(c, u) + 1e-12);
    u.weights = sol.weights;
    EXPECT_NEAR(action(c, u), sol.lambda, 1e-12);
  }
}

TEST(OptimalWeights, WarmStartAgrees) {
  const Sphere s(1.4);
  const auto pts = sample_uniform(s, 20, 3);
  const auto cold = optimal_weights<Sphere>(s, pts);
  const auto warm = optimal_weights<Sphere>(s, pts, cold.weights);
  EXPECT_NEAR(cold.lambda, warm.lambda, 1e-12);
}
