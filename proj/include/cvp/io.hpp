#pragma once

// Runtime model selection and JSON serialization of measures and reports.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "cvp/bounds.hpp"
#include "cvp/certify.hpp"
#include "cvp/errors.hpp"
#include "cvp/exact.hpp"
#include "cvp/manifold.hpp"
#include "cvp/measure.hpp"

namespace cvp {

using json = nlohmann::json;

enum class ManifoldKind { Circle, Sphere, Flag };

inline const char* to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Sphere: return "sphere";
    case ManifoldKind::Flag: return "flag";
  }
  return "?";
}

inline ManifoldKind parse_kind(const std::string& s) {
  if (s == "circle") return ManifoldKind::Circle;
  if (s == "sphere") return ManifoldKind::Sphere;
  if (s == "flag") return ManifoldKind::Flag;
  throw usage_error("unknown manifold '" + s + "' (expected circle, sphere or flag)");
}

/// Which manifold plus the coupling; f is used by the flag manifold only.
struct ManifoldModel {
  ManifoldKind kind = ManifoldKind::Circle;
  double tau = 1.0;
  int f = 3;
};

/// Call fn with the concrete model (Circle, Sphere or Flag). Constructing it checks tau and f.
template <class F>
decltype(auto) with_model(const ManifoldModel& m, F&& fn) {
  switch (m.kind) {
    case ManifoldKind::Circle: return fn(Circle(m.tau));
    case ManifoldKind::Sphere: return fn(Sphere(m.tau));
    case ManifoldKind::Flag: break;
  }
  return fn(Flag(m.f, m.tau));
}

inline ManifoldModel describe(const Circle& c) { return {ManifoldKind::Circle, c.tau(), 0}; }
inline ManifoldModel describe(const Sphere& s) { return {ManifoldKind::Sphere, s.tau(), 0}; }
inline ManifoldModel describe(const Flag& fl) { return {ManifoldKind::Flag, fl.tau(), fl.f()}; }

// ---------------------------------------------------------------------------
// Points

inline json to_json(const CirclePoint& p) { return json::array({p.angle}); }
inline json to_json(const SpherePoint& p) { return json::array({p.v.x(), p.v.y(), p.v.z()}); }
inline json to_json(const FlagPoint& p) {
  auto vec = [](const Eigen::VectorXcd& z) {
    json a = json::array();
    for (Eigen::Index i = 0; i < z.size(); ++i) a.push_back(json::array({z[i].real(), z[i].imag()}));
    return a;
  };
  return json{{"u", vec(p.u)}, {"v", vec(p.v)}};
}

namespace detail {

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw parse_error(what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw parse_error(what + ": not finite");
  return v;
}

inline Eigen::VectorXcd complex_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw parse_error(what + ": expected an array of [re, im] pairs");
  Eigen::VectorXcd z(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != 2) throw parse_error(what + ": entries must be [re, im] pairs");
    z[static_cast<Eigen::Index>(i)] = {number(j[i][0], what), number(j[i][1], what)};
  }
  return z;
}

}  // namespace detail

inline CirclePoint point_from_json(const Circle&, const json& j) {
  if (!j.is_array() || j.size() != 1) throw usage_error("circle point must be [angle]");
  return {wrap_angle(detail::number(j[0], "circle point"))};
}

inline SpherePoint point_from_json(const Sphere& s, const json& j) {
  if (!j.is_array() || j.size() != 3) throw usage_error("sphere point must be [x, y, z]");
  SpherePoint p{Eigen::Vector3d(detail::number(j[0], "sphere point"), detail::number(j[1], "sphere point"),
                                detail::number(j[2], "sphere point"))};
  if (!s.is_valid(p)) {
    if (std::abs(p.v.norm() - 1.0) > 1e-6) throw usage_error("sphere point is not a unit vector");
    p.v.normalize();
  }
  return p;
}

inline FlagPoint point_from_json(const Flag& fl, const json& j) {
  if (!j.is_object() || !j.contains("u") || !j.contains("v")) throw usage_error("flag point must be {u: [...], v: [...]}");
  FlagPoint p = make_flag_point(detail::complex_vector(j["u"], "flag u"), detail::complex_vector(j["v"], "flag v"));
  if (p.u.size() != fl.f()) throw usage_error("flag point has dimension " + std::to_string(p.u.size()) +
                                              ", model has f = " + std::to_string(fl.f()));
  return p;
}

// ---------------------------------------------------------------------------
// Measures

template <Manifold M>
json measure_to_json(const M& model, const WeightedMeasure<M>& m) {
  const ManifoldModel d = describe(model);
  json j;
  j["manifold"] = to_string(d.kind);
  j["tau"] = d.tau;
  if (d.kind == ManifoldKind::Flag) j["f"] = d.f;
  json pts = json::array();
  for (const auto& p : m.points) pts.push_back(to_json(p));
  j["points"] = std::move(pts);
  j["weights"] = m.weights;
  return j;
}

template <Manifold M>
struct TypedMeasure {
  M model;
  WeightedMeasure<M> measure;
};

using AnyMeasure = std::variant<TypedMeasure<Circle>, TypedMeasure<Sphere>, TypedMeasure<Flag>>;

inline ManifoldModel model_from_json(const json& j) {
  if (!j.is_object()) throw parse_error("measure: expected a JSON object");
  if (!j.contains("manifold") || !j["manifold"].is_string()) throw parse_error("measure: missing 'manifold'");
  if (!j.contains("tau")) throw parse_error("measure: missing 'tau'");
  ManifoldModel m;
  m.kind = parse_kind(j["manifold"].get<std::string>());
  m.tau = detail::number(j["tau"], "tau");
  if (m.kind == ManifoldKind::Flag) {
    if (!j.contains("f") || !j["f"].is_number_integer()) throw parse_error("measure: flag manifold needs integer 'f'");
    m.f = j["f"].get<int>();
  }
  return m;
}

inline AnyMeasure measure_from_json(const json& j) {
  const ManifoldModel mm = model_from_json(j);
  for (const char* key : {"points", "weights"})
    if (!j.contains(key) || !j[key].is_array()) throw parse_error(std::string("measure: missing array '") + key + "'");
  for (const auto& [key, _] : j.items())
    if (key != "manifold" && key != "tau" && key != "f" && key != "points" && key != "weights")
      throw parse_error("measure: unknown key '" + key + "'");
  return with_model(mm, [&](const auto& model) -> AnyMeasure {
    using M = std::decay_t<decltype(model)>;
    TypedMeasure<M> t{model, {}};
    for (const auto& p : j["points"]) t.measure.points.push_back(point_from_json(model, p));
    for (const auto& w : j["weights"]) t.measure.weights.push_back(detail::number(w, "weight"));
    validate(model, t.measure, 1e-9);
    return t;
  });
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << text;
  if (!out) throw io_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const CertificateReport& r) {
  return json{{"action", r.action},
              {"el_residual", r.el_residual},
              {"support_deviation", r.support_deviation},
              {"grid_deficit", r.grid_deficit},
              {"gram_min_eig", r.gram_min_eig},
              {"gram_trace", r.gram_trace},
              {"support_size", r.support_size},
              {"dee_spread", r.dee_spread},
              {"classification", to_string(r.classification)},
              {"moment_residuals", r.moment_residuals},
              {"obstructed", r.obstructed},
              {"consistent", r.consistent}};
}

inline json to_json(const HeatBound& b) {
  return json{{"t1", b.t1}, {"t2", b.t2}, {"delta", b.delta}, {"lambda", b.lambda}, {"S_K", b.s_k}, {"dominated", b.dominated}};
}

inline json to_json(const BoundsReport& r) {
  json j{{"tau", r.tau}, {"nu0", {{"value", r.nu0.value}, {"valid", r.nu0.valid}}}, {"volume_upper", r.volume_upper}};
  j["heat_kernel"] = r.heat ? to_json(*r.heat) : json(nullptr);
  json t = json::array();
  for (const auto& e : r.tammes) t.push_back({{"name", e.name}, {"K", e.k}, {"value", e.value}});
  j["tammes"] = std::move(t);
  if (auto tu = r.tammes_upper()) j["tammes_upper"] = *tu;
  if (r.best_found) j["best_found"] = *r.best_found;
  j["max_valid_lower"] = r.max_valid_lower();
  j["min_upper"] = r.min_upper();
  j["sandwich"] = r.sandwich_holds();
  return j;
}

}  // namespace cvp
