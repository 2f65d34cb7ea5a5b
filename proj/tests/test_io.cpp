#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cvp/anneal.hpp"
#include "cvp/bounds.hpp"
#include "cvp/exact.hpp"
#include "cvp/io.hpp"

using namespace cvp;

namespace {

const std::string kData = CVP_DATA_DIR;

template <Manifold M>
double round_trip_drift(const M& model, const WeightedMeasure<M>& m) {
  const std::string text = measure_to_json(model, m).dump(2);
  const AnyMeasure back = measure_from_json(json::parse(text));
  const auto* t = std::get_if<TypedMeasure<M>>(&back);
  if (!t) return INFINITY;
  EXPECT_EQ(t->model.tau(), model.tau());
  EXPECT_EQ(t->measure.weights, m.weights);
  return std::abs(action(t->model, t->measure) - action(model, m));
}

}  // namespace

TEST(MeasureJson, RoundTrip) {
  EXPECT_LT(round_trip_drift(Circle(3.0), circle_chain_minimizer(3.0).measure), 1e-12);
  EXPECT_LT(round_trip_drift(Sphere(1.2), octahedron()), 1e-12);
  const Sphere s(1.7);
  EXPECT_LT(round_trip_drift(s, WeightedMeasure<Sphere>::uniform(sample_uniform(s, 9, 3))), 1e-12);
  const Flag fl(4, 1.5);
  EXPECT_LT(round_trip_drift(fl, WeightedMeasure<Flag>::uniform(sample_uniform(fl, 7, 3))), 1e-12);
}

TEST(MeasureJson, Layout) {
  const json j = measure_to_json(Flag(3, 2.0), WeightedMeasure<Flag>::uniform(sample_uniform(Flag(3, 2.0), 1, 0)));
  EXPECT_EQ(j["manifold"], "flag");
  EXPECT_EQ(j["f"], 3);
  EXPECT_EQ(j["points"][0]["u"].size(), 3u);
  EXPECT_EQ(j["points"][0]["u"][0].size(), 2u);
  const json c = measure_to_json(Circle(1.5), circle_uniform(2));
  EXPECT_FALSE(c.contains("f"));
  EXPECT_EQ(c["points"][1][0], std::numbers::pi);
}

TEST(MeasureJson, Rejects) {
  const json good = measure_to_json(Sphere(1.2), octahedron());
  auto with = [&](const std::string& key, const json& v) {
    json j = good;
    j[key] = v;
    return j;
  };
  EXPECT_THROW(measure_from_json(json::array()), parse_error);
  EXPECT_THROW(measure_from_json(with("manifold", "torus")), usage_error);
  EXPECT_THROW(measure_from_json(with("tau", "big")), parse_error);
  EXPECT_THROW(measure_from_json(with("tau", 0.5)), domain_error);
  EXPECT_THROW(measure_from_json(with("extra", 1)), parse_error);
  EXPECT_THROW(measure_from_json(with("weights", json::array({1.0}))), usage_error);
  EXPECT_THROW(measure_from_json(with("manifold", "circle")), usage_error);
  json bad_point = good;
  bad_point["points"][0] = json::array({2.0, 0.0, 0.0});
  EXPECT_THROW(measure_from_json(bad_point), usage_error);
  json no_points = good;
  no_points.erase("points");
  EXPECT_THROW(measure_from_json(no_points), parse_error);

  // Flag dimension must match f.
  json fj = measure_to_json(Flag(4, 1.5), WeightedMeasure<Flag>::uniform(sample_uniform(Flag(4, 1.5), 2, 1)));
  fj["f"] = 3;
  EXPECT_THROW(measure_from_json(fj), usage_error);
}

TEST(Files, ReadErrors) {
  EXPECT_THROW(read_json_file("/nonexistent/x.json"), io_error);
  EXPECT_THROW(read_packing("/nonexistent/p.txt"), io_error);
  EXPECT_THROW(write_text_file("/nonexistent/dir/out.json", "x"), io_error);
}

TEST(Packing, ShippedFiles) {
  EXPECT_EQ(read_packing(kData + "/packings/tetrahedron.txt").size(), 4u);
  EXPECT_EQ(read_packing(kData + "/packings/octahedron.txt").size(), 6u);
  const auto ico = read_packing(kData + "/packings/icosahedron.txt");
  ASSERT_EQ(ico.size(), 12u);
  // Nearest-neighbour angle of the icosahedron is arctan 2.
  double best = -1.0;
  for (std::size_t j = 1; j < ico.size(); ++j) best = std::max(best, ico[0].v.dot(ico[j].v));
  EXPECT_NEAR(std::acos(best), std::atan(2.0), 1e-12);
}

TEST(Packing, ParseErrors) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_packing(in, "t");
  };
  EXPECT_EQ(parse("# comment\n\n0 0 1\n  1 0 0\n").size(), 2u);
  EXPECT_THROW(parse("0 0\n"), parse_error);
  EXPECT_THROW(parse("0 0 1 4\n"), parse_error);
  EXPECT_THROW(parse("0 0 2\n"), parse_error);
  EXPECT_THROW(parse("a b c\n"), parse_error);
  EXPECT_THROW(parse("# nothing\n"), parse_error);
  try {
    parse("0 0 1\n1 1\n");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_NE(std::string(e.what()).find("t:2"), std::string::npos);
  }
}

TEST(ReportJson, Fields) {
  const json c = to_json(certify(Sphere(1.2), octahedron(), 100));
  EXPECT_EQ(c["classification"], "GenericallyTimelike");
  EXPECT_EQ(c["support_size"], 6);
  const json b = to_json(compute_bounds(Sphere(1.5)));
  EXPECT_TRUE(b["nu0"]["valid"].get<bool>());
  EXPECT_TRUE(b["sandwich"].get<bool>());
  EXPECT_FALSE(b.contains("best_found"));
  EXPECT_FALSE(b.contains("tammes_upper"));
}

TEST(Model, Dispatch) {
  EXPECT_EQ(with_model({ManifoldKind::Sphere, 1.3, 0}, [](const auto& m) { return std::string(m.name); }), "sphere");
  EXPECT_EQ(with_model({ManifoldKind::Flag, 1.3, 5}, [](const auto& m) { return describe(m).f; }), 5);
  EXPECT_THROW(with_model({ManifoldKind::Flag, 1.3, 2}, [](const auto&) { return 0; }), domain_error);
  EXPECT_THROW(parse_kind("torus"), usage_error);
}
