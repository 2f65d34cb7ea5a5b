#pragma once

// Optimal weights for fixed support points: minimize w^T G w over the probability
// simplex, G_ij = L(x_i, x_j). Pairwise transfers get close, an active-set solve on
// the bordered KKT system finishes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cvp/manifold.hpp"
#include "cvp/measure.hpp"

namespace cvp {

struct WeightSolution {
  std::vector<double> weights;
  double lambda = 0.0;        ///< common value of (Gw)_i on the support, equals the action
  double kkt_residual = 0.0;  ///< relative to max_i G_ii
  int iterations = 0;
};

template <Manifold M>
Eigen::MatrixXd gram_matrix(const M& model, std::span<const typename M::point_type> pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = lagrangian(model, pts[i], pts[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) g(i, j) = g(j, i) = lagrangian(model, pts[i], pts[j]);
  }
  return g;
}

/// max over the support of |(Gw)_i - lambda| and over all i of max(0, lambda - (Gw)_i),
/// with lambda = w^T G w, divided by max_i G_ii.
inline double kkt_residual(const Eigen::MatrixXd& g, const Eigen::VectorXd& w, double* lambda_out = nullptr) {
  const Eigen::VectorXd gw = g * w;
  const double lambda = w.dot(gw);
  double r = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) r = std::max(r, std::abs(gw[i] - lambda));
    r = std::max(r, lambda - gw[i]);
  }
  if (lambda_out) *lambda_out = lambda;
  const double scale = g.diagonal().maxCoeff();
  return scale > 0.0 ? r / scale : r;
}

namespace detail {

inline void project_to_simplex_sum(Eigen::VectorXd& w) {
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!(w[i] > 0.0)) w[i] = 0.0;
  const double s = w.sum();
  if (s > 0.0) w /= s;
  else w.setConstant(1.0 / static_cast<double>(w.size()));
}

/// Sequential minimal optimization: move mass from the worst support point to the best point.
inline int pairwise_descent(const Eigen::MatrixXd& g, Eigen::VectorXd& w, double tol, int max_iter) {
  Eigen::VectorXd gw = g * w;
  const Eigen::Index n = w.size();
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::Index lo = 0, hi = -1;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (gw[k] < gw[lo]) lo = k;
      if (w[k] > 0.0 && (hi < 0 || gw[k] > gw[hi])) hi = k;
    }
    if (hi < 0 || hi == lo || gw[hi] - gw[lo] <= tol) break;
    const double curv = g(lo, lo) + g(hi, hi) - 2.0 * g(lo, hi);
    double delta = w[hi];
    if (curv > 0.0) delta = std::min(delta, (gw[hi] - gw[lo]) / curv);
    if (delta <= 0.0) break;
    w[lo] += delta;
    w[hi] -= delta;
    if (w[hi] < 1e-300) w[hi] = 0.0;
    gw += delta * (g.col(lo) - g.col(hi));
    if (it % 64 == 63) gw = g * w;  // keep rounding drift out of the incremental update
  }
  return it;
}

/// Primal active-set polish. Returns false if it could not improve on the input.
inline bool active_set_polish(const Eigen::MatrixXd& g, Eigen::VectorXd& w, double tol, int max_iter) {
  const Eigen::Index n = w.size();
  std::vector<char> free(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) free[i] = w[i] > 0.0;
  const double start = w.dot(g * w);
  Eigen::VectorXd cur = w;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (free[i]) idx.push_back(i);
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) kkt(a, b) = g(idx[a], idx[b]);
      kkt(a, k) = kkt(k, a) = 1.0;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    rhs[k] = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return false;

    Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < k; ++a) target[idx[a]] = sol[a];

    // Walk towards the face optimum until the first weight hits zero.
    double alpha = 1.0;
    Eigen::Index block = -1;
    for (Eigen::Index i : idx) {
      if (target[i] < 0.0) {
        const double a = cur[i] / (cur[i] - target[i]);
        if (a < alpha) {
          alpha = a;
          block = i;
        }
      }
    }
    cur += alpha * (target - cur);
    if (block >= 0) {
      cur[block] = 0.0;
      free[block] = 0;
      for (Eigen::Index i : idx)
        if (cur[i] <= 0.0) {
          cur[i] = 0.0;
          free[i] = 0;
        }
      continue;
    }
    // Face optimum reached; release the most violated bound, if any.
    const Eigen::VectorXd gw = g * cur;
    const double lambda = cur.dot(gw);
    Eigen::Index add = -1;
    double worst = -tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!free[i] && gw[i] - lambda < worst) {
        worst = gw[i] - lambda;
        add = i;
      }
    }
    if (add < 0) break;
    free[add] = 1;
  }
  project_to_simplex_sum(cur);
  if (cur.dot(g * cur) > start + 1e-14 * std::max(1.0, std::abs(start))) return false;
  w = cur;
  return true;
}

}  // namespace detail

/// Minimize w^T G w over the simplex. `warm` (optional) is the starting point.
inline WeightSolution solve_simplex_qp(const Eigen::MatrixXd& g, std::span<const double> warm = {}) {
  const Eigen::Index n = g.rows();
  WeightSolution out;
  if (n == 0) return out;
  Eigen::VectorXd w(n);
  if (static_cast<Eigen::Index>(warm.size()) == n) {
    for (Eigen::Index i = 0; i < n; ++i) w[i] = warm[i];
    detail::project_to_simplex_sum(w);
  } else {
    w.setConstant(1.0 / static_cast<double>(n));
  }
  const double scale = std::max(g.diagonal().maxCoeff(), std::numeric_limits<double>::min());
  out.iterations = detail::pairwise_descent(g, w, 1e-12 * scale, 2000 + 200 * static_cast<int>(n));

  // Two polishing rounds: the second one picks up bounds the first released late.
  for (int round = 0; round < 2; ++round) {
    Eigen::VectorXd trial = w;
    if (!detail::active_set_polish(g, trial, 1e-13 * scale, 4 * static_cast<int>(n) + 20)) break;
    const double before = kkt_residual(g, w), after = kkt_residual(g, trial);
    if (after > before) break;
    w = trial;
    if (after < 1e-13) break;
  }
  out.kkt_residual = kkt_residual(g, w, &out.lambda);
  out.weights.assign(w.data(), w.data() + n);
  return out;
}

template <Manifold M>
WeightSolution optimal_weights(const M& model, std::span<const typename M::point_type> pts,
                               std::span<const double> warm = {}) {
  if (pts.empty()) throw usage_error("optimal_weights: need at least one point");
  return solve_simplex_qp(gram_matrix(model, pts), warm);
}

/// Replace the weights of `m` by the optimal ones for its points.
template <Manifold M>
WeightSolution reweight(const M& model, WeightedMeasure<M>& m) {
  WeightSolution s = optimal_weights<M>(model, m.points, m.weights);
  m.weights = s.weights;
  return s;
}

}  // namespace cvp
