#pragma once

// Two-sided bounds for the minimal action on the sphere at one coupling.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cvp/errors.hpp"
#include "cvp/heat_kernel.hpp"
#include "cvp/manifold.hpp"
#include "cvp/measure.hpp"
#include "cvp/spectral.hpp"

namespace cvp {

/// Action of the equal-weight measure on a packing.
inline double tammes_upper_bound(const Sphere& s, const std::vector<SpherePoint>& packing) {
  if (packing.empty()) throw usage_error("tammes_upper_bound: empty packing");
  for (const auto& p : packing)
    if (!s.is_valid(p)) throw usage_error("tammes_upper_bound: packing point is not a unit vector");
  return action(s, WeightedMeasure<Sphere>::uniform(packing));
}

/// One point per line, three coordinates; '#' starts a comment line. Points within
/// 1e-6 of unit norm are normalized, anything else is rejected.
inline std::vector<SpherePoint> parse_packing(std::istream& in, const std::string& origin = "<stream>") {
  std::vector<SpherePoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    std::string extra;
    if (!(ls >> x >> y >> z) || (ls >> extra))
      throw parse_error(origin + ":" + std::to_string(lineno) + ": expected three numbers");
    const Eigen::Vector3d v(x, y, z);
    if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-6)
      throw parse_error(origin + ":" + std::to_string(lineno) + ": point is not on the unit sphere");
    pts.push_back({v.normalized()});
  }
  if (pts.empty()) throw parse_error(origin + ": no points");
  return pts;
}

inline std::vector<SpherePoint> read_packing(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open packing file " + path);
  return parse_packing(in, path);
}

struct TammesEntry {
  std::string name;
  std::size_t k = 0;
  double value = 0.0;
};

struct BoundsReport {
  double tau = 0.0;
  LowerBound nu0;
  std::optional<HeatBound> heat;
  double volume_upper = 0.0;
  std::vector<TammesEntry> tammes;
  std::optional<double> best_found;

  std::optional<double> tammes_upper() const {
    if (tammes.empty()) return std::nullopt;
    double v = tammes.front().value;
    for (const auto& t : tammes) v = std::min(v, t.value);
    return v;
  }

  double max_valid_lower() const {
    double v = -std::numeric_limits<double>::infinity();
    if (nu0.valid) v = std::max(v, nu0.value);
    if (heat && heat->dominated) v = std::max(v, heat->s_k);
    return v;
  }

  double min_upper() const {
    double v = volume_upper;
    if (auto t = tammes_upper()) v = std::min(v, *t);
    if (best_found) v = std::min(v, *best_found);
    return v;
  }

  bool sandwich_holds(double tol = 1e-9) const { return max_valid_lower() <= min_upper() + tol; }
};

struct NamedPacking {
  std::string name;
  std::vector<SpherePoint> points;
};

/// Default search grid for the heat-kernel parameters.
inline std::vector<double> default_heat_grid() { return log_grid(0.01, 2.0, 40); }

inline BoundsReport compute_bounds(const Sphere& s, const std::vector<NamedPacking>& packings = {},
                                   std::optional<double> best_found = std::nullopt,
                                   const std::vector<double>& heat_grid = default_heat_grid()) {
  BoundsReport r;
  r.tau = s.tau();
  r.nu0 = nu0_lower_bound(s);
  r.heat = optimize_heat_params(s, heat_grid);
  r.volume_upper = volume_action(s.tau());
  for (const auto& p : packings) r.tammes.push_back({p.name, p.points.size(), tammes_upper_bound(s, p.points)});
  r.best_found = best_found;
  return r;
}

}  // namespace cvp
