#pragma once

// Continuation in tau: cold anneals plus warm-started ascending and descending
// passes, keeping the best measure found at each grid point.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvp/anneal.hpp"
#include "cvp/certify.hpp"
#include "cvp/errors.hpp"
#include "cvp/manifold.hpp"

namespace cvp {

struct ScanRow {
  double tau = 0.0;
  std::size_t m = 0;
  double action = 0.0;
  std::size_t support_size = 0;  ///< after pruning, merging and support reduction
  Classification classification = Classification::Unclassified;
  double el_residual = 0.0;
};

struct ScanOptions {
  double merge_radius = 1e-3;
  double warm_t_start = 1e-3;     ///< warm passes start cold enough to stay in the basin
  int warm_restarts = 2;
  std::size_t test_grid_size = 2000;
  double classify_tol = 1e-2;
  double sparsify_tol = 1e-9;   ///< relative to 8 tau^2; <= 0 disables support reduction
};

template <Manifold M>
struct ScanPoint {
  ScanRow row;
  WeightedMeasure<M> measure;
};

namespace detail {

template <Manifold M>
WeightedMeasure<M> clean_candidate(const M& model, const WeightedMeasure<M>& m, const ScanOptions& opt) {
  WeightedMeasure<M> out = finalize(model, m, opt.merge_radius);
  if (opt.sparsify_tol > 0.0) out = sparsify(model, out, opt.sparsify_tol);
  return out;
}

}  // namespace detail

/// One row per tau. `model` supplies everything except tau (e.g. the flag dimension).
template <Manifold M>
std::vector<ScanPoint<M>> tau_scan_detailed(const M& model, const std::vector<double>& tau_grid, std::size_t m,
                                            const AnnealSchedule& sched, const ScanOptions& opt = {}) {
  validate(sched);
  if (m < 1) throw domain_error("tau_scan: m must be >= 1");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (!(tau_grid[i] > tau_grid[i - 1])) throw usage_error("tau_scan: tau grid must be strictly ascending");
  const std::size_t n = tau_grid.size();
  std::vector<M> models;
  for (double t : tau_grid) models.push_back(model.with_tau(t));

  std::vector<WeightedMeasure<M>> best(n);
  std::vector<double> best_action(n);
  for (std::size_t i = 0; i < n; ++i) {
    best[i] = anneal_run(models[i], m, sched).measure;
    best_action[i] = action(models[i], best[i]);
  }

  AnnealSchedule warm = sched;
  warm.t_start = std::max(opt.warm_t_start, sched.t_end * 10.0);
  warm.restarts = std::max(1, opt.warm_restarts);
  auto pass = [&](auto indices) {
    std::optional<WeightedMeasure<M>> prev;
    for (std::size_t i : indices) {
      if (prev) {
        auto r = anneal_from(models[i], *prev, warm);
        if (r.action < best_action[i] - 1e-12) {
          best[i] = std::move(r.measure);
          best_action[i] = r.action;
        }
      }
      prev = best[i];
    }
  };
  std::vector<std::size_t> up(n);
  for (std::size_t i = 0; i < n; ++i) up[i] = i;
  pass(up);
  std::vector<std::size_t> down(up.rbegin(), up.rend());
  pass(down);

  std::vector<ScanPoint<M>> out;
  for (std::size_t i = 0; i < n; ++i) {
    ScanPoint<M> p;
    p.measure = detail::clean_candidate(models[i], best[i], opt);
    const CertificateReport cert = certify(models[i], p.measure, opt.test_grid_size, opt.classify_tol);
    p.row = {tau_grid[i], m, cert.action, cert.support_size, cert.classification, cert.el_residual};
    out.push_back(std::move(p));
  }
  return out;
}

template <Manifold M>
std::vector<ScanRow> tau_scan(const M& model, const std::vector<double>& tau_grid, std::size_t m,
                              const AnnealSchedule& sched, const ScanOptions& opt = {}) {
  std::vector<ScanRow> rows;
  for (auto& p : tau_scan_detailed(model, tau_grid, m, sched, opt)) rows.push_back(p.row);
  return rows;
}

/// Grid points lo, lo + step, ... up to hi (inclusive within step/1000).
inline std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw usage_error("linear_grid: step must be positive");
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double t = lo + k * step;
    if (t > hi + step * 1e-3) break;
    g.push_back(t);
  }
  return g;
}

/// Midpoints of grid cells where the support size changes.
inline std::vector<double> support_jumps(const std::vector<ScanRow>& rows) {
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].support_size != rows[i - 1].support_size) out.push_back(0.5 * (rows[i].tau + rows[i - 1].tau));
  return out;
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "tau,m,action,support_size,classification,el_residual\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%zu,%.17g,%zu,%s,%.6e\n", r.tau, r.m, r.action, r.support_size,
                  to_string(r.classification), r.el_residual);
    os << buf;
  }
}

}  // namespace cvp
