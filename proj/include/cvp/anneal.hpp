#pragma once

// Simulated annealing over the support points of a weighted counting measure,
// with exact weight re-solves, plus the post-processing that turns an annealed
// measure into a clean candidate (pruning, cluster merging).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cvp/errors.hpp"
#include "cvp/manifold.hpp"
#include "cvp/measure.hpp"
#include "cvp/parallel.hpp"
#include "cvp/rng.hpp"
#include "cvp/weights.hpp"

namespace cvp {

/// Temperatures are relative to the kernel scale 8 tau^2.
struct AnnealSchedule {
  double t_start = 1.0;
  double t_end = 1e-6;
  double cooling = 0.97;
  int steps_per_temp = 200;
  int restarts = 8;
  std::uint64_t seed = 0;
  int resolve_every = 50;      ///< accepted moves between full weight re-solves
  double step_end = 1e-3;      ///< proposal step (radians) at t_end, proportional to T above it
  double step_max = 3.141592653589793;  ///< cap on the proposal step
  double transfer_prob = 0.3;  ///< share of weight-transfer proposals
  unsigned threads = 0;        ///< 0: CVP_THREADS or hardware concurrency
};

inline void validate(const AnnealSchedule& s) {
  if (!(s.t_end > 0.0) || !(s.t_start > s.t_end))
    throw usage_error("schedule: need t_start > t_end > 0");
  if (!(s.cooling > 0.0 && s.cooling < 1.0)) throw usage_error("schedule: cooling must lie in (0, 1)");
  if (s.steps_per_temp < 1) throw usage_error("schedule: steps_per_temp must be >= 1");
  if (s.restarts < 1) throw usage_error("schedule: restarts must be >= 1");
  if (s.resolve_every < 1) throw usage_error("schedule: resolve_every must be >= 1");
  if (!(s.step_end > 0.0) || !(s.step_max >= s.step_end)) throw usage_error("schedule: need 0 < step_end <= step_max");
  if (!(s.transfer_prob >= 0.0 && s.transfer_prob <= 1.0)) throw usage_error("schedule: transfer_prob must lie in [0, 1]");
}

template <Manifold M>
struct AnnealResult {
  WeightedMeasure<M> measure;
  double action = 0.0;
  double initial_action = 0.0;
  int best_restart = 0;
  std::vector<double> restart_actions;
  long accepted = 0;
  long proposed = 0;
};

namespace detail {

/// Annealing state with the Gram matrix and G w kept in sync incrementally.
template <Manifold M>
class AnnealState {
 public:
  using point_type = typename M::point_type;

  AnnealState(const M& model, WeightedMeasure<M> m) : model_(model), pts_(std::move(m.points)) {
    const auto n = static_cast<Eigen::Index>(pts_.size());
    w_ = Eigen::Map<const Eigen::VectorXd>(m.weights.data(), n);
    g_ = gram_matrix<M>(model_, pts_);
    refresh();
  }

  double action() const { return s_; }
  std::size_t size() const { return pts_.size(); }
  double weight(std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }
  const point_type& point(std::size_t i) const { return pts_[i]; }

  void refresh() {
    gw_ = g_ * w_;
    s_ = w_.dot(gw_);
  }

  /// Change of the action if point i moves to q; fills `col` with L(q, x_j).
  double delta_move(std::size_t i, const point_type& q, Eigen::VectorXd& col) const {
    const auto n = static_cast<Eigen::Index>(pts_.size());
    const auto ii = static_cast<Eigen::Index>(i);
    col.resize(n);
    double d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      col[j] = j == ii ? lagrangian(model_, q, q) : lagrangian(model_, q, pts_[static_cast<std::size_t>(j)]);
      if (j != ii) d += w_[j] * (col[j] - g_(ii, j));
    }
    return 2.0 * w_[ii] * d + w_[ii] * w_[ii] * (col[ii] - g_(ii, ii));
  }

  void apply_move(std::size_t i, const point_type& q, const Eigen::VectorXd& col, double delta) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd diff = col - g_.col(ii);
    gw_ += w_[ii] * diff;
    g_.col(ii) = col;
    g_.row(ii) = col.transpose();
    gw_[ii] = g_.row(ii).dot(w_);
    pts_[i] = q;
    s_ += delta;
  }

  /// Change of the action if mass `t` moves from j to i.
  double delta_transfer(std::size_t i, std::size_t j, double t) const {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    return 2.0 * t * (gw_[a] - gw_[b]) + t * t * (g_(a, a) + g_(b, b) - 2.0 * g_(a, b));
  }

  void apply_transfer(std::size_t i, std::size_t j, double t, double delta) {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    w_[a] += t;
    w_[b] -= t;
    if (w_[b] < 0.0) w_[b] = 0.0;
    gw_ += t * (g_.col(a) - g_.col(b));
    s_ += delta;
  }

  /// Replace the weights by the optimal ones if that lowers the action.
  void resolve_weights() {
    refresh();
    const WeightSolution sol = solve_simplex_qp(g_, std::span<const double>(w_.data(), static_cast<std::size_t>(w_.size())));
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(sol.weights.data(), w_.size());
    const double s = w.dot(g_ * w);
    if (s <= s_) {
      w_ = w;
      refresh();
    }
  }

  WeightedMeasure<M> measure() const {
    WeightedMeasure<M> m;
    m.points = pts_;
    m.weights.assign(w_.data(), w_.data() + w_.size());
    renormalize(m);
    return m;
  }

 private:
  M model_;
  std::vector<point_type> pts_;
  Eigen::VectorXd w_;
  Eigen::MatrixXd g_;
  Eigen::VectorXd gw_;
  double s_ = 0.0;
};

struct RunStats {
  long accepted = 0;
  long proposed = 0;
};

template <Manifold M>
WeightedMeasure<M> anneal_once(const M& model, WeightedMeasure<M> start, const AnnealSchedule& sch,
                               std::uint64_t stream_seed, RunStats& stats) {
  CounterRng rng(stream_seed, 1);
  AnnealState<M> st(model, std::move(start));
  st.resolve_weights();
  WeightedMeasure<M> best = st.measure();
  double best_s = st.action();

  const double scale = kernel_scale(model);
  const std::size_t n = st.size();
  Eigen::VectorXd col;
  long since_resolve = 0;
  for (double t = sch.t_start; t > sch.t_end; t *= sch.cooling) {
    const double temp = t * scale;
    const double frac = t / sch.t_start;
    const double step = std::min(sch.step_max, sch.step_end * t / sch.t_end);
    for (int k = 0; k < sch.steps_per_temp; ++k) {
      ++stats.proposed;
      double delta = 0.0;
      bool accept = false;
      if (n >= 2 && rng.uniform() < sch.transfer_prob) {
        const auto i = static_cast<std::size_t>(rng.next_u64() % n);
        auto j = static_cast<std::size_t>(rng.next_u64() % (n - 1));
        if (j >= i) ++j;
        const double amount = std::min(st.weight(j), frac) * rng.uniform();
        if (amount <= 0.0) continue;
        delta = st.delta_transfer(i, j, amount);
        accept = delta <= 0.0 || rng.uniform() < std::exp(-delta / temp);
        if (accept) st.apply_transfer(i, j, amount, delta);
      } else {
        const auto i = static_cast<std::size_t>(rng.next_u64() % n);
        const auto q = model.jitter(st.point(i), step, rng);
        delta = st.delta_move(i, q, col);
        accept = delta <= 0.0 || rng.uniform() < std::exp(-delta / temp);
        if (accept) st.apply_move(i, q, col, delta);
      }
      if (!accept) continue;
      ++stats.accepted;
      if (++since_resolve >= sch.resolve_every) {
        since_resolve = 0;
        st.resolve_weights();
      }
      if (st.action() < best_s) {
        best_s = st.action();
        best = st.measure();
      }
    }
  }
  // Final exact weights for the best configuration seen.
  reweight(model, best);
  return best;
}

}  // namespace detail

/// n points drawn uniformly with equal weights.
template <Manifold M>
WeightedMeasure<M> random_measure(const M& model, std::size_t n, std::uint64_t seed) {
  return WeightedMeasure<M>::uniform(sample_uniform(model, n, seed));
}

/// Anneal from the given starting measures (one per restart), keep the best.
/// Ties within 1e-12 go to the lowest restart index.
template <Manifold M>
AnnealResult<M> anneal_starts(const M& model, const std::vector<WeightedMeasure<M>>& starts,
                              const AnnealSchedule& sch) {
  validate(sch);
  const std::size_t r = starts.size();
  if (r == 0) throw usage_error("anneal: no starting configuration");
  std::vector<WeightedMeasure<M>> outs(r);
  std::vector<detail::RunStats> stats(r);
  parallel_for(r, sch.threads, [&](std::size_t k) {
    outs[k] = detail::anneal_once(model, starts[k], sch, derive_seed(sch.seed, 1000 + k), stats[k]);
  });
  AnnealResult<M> res;
  res.initial_action = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) res.initial_action = std::min(res.initial_action, action(model, s));
  std::size_t best = 0;
  for (std::size_t k = 0; k < r; ++k) {
    const double a = action(model, outs[k]);
    res.restart_actions.push_back(a);
    if (a < res.restart_actions[best] - 1e-12) best = k;
    res.accepted += stats[k].accepted;
    res.proposed += stats[k].proposed;
  }
  res.best_restart = static_cast<int>(best);
  res.measure = std::move(outs[best]);
  res.action = res.restart_actions[best];
  // Never hand back something worse than where we started.
  for (const auto& s : starts) {
    const double a = action(model, s);
    if (a < res.action - 1e-12) {
      res.measure = s;
      res.action = a;
    }
  }
  return res;
}

/// Cold start: every restart begins from m random points.
template <Manifold M>
AnnealResult<M> anneal_run(const M& model, std::size_t m, const AnnealSchedule& sch) {
  if (m < 1) throw domain_error("anneal: m must be >= 1");
  validate(sch);
  std::vector<WeightedMeasure<M>> starts;
  for (int k = 0; k < sch.restarts; ++k)
    starts.push_back(random_measure(model, m, derive_seed(sch.seed, static_cast<std::uint64_t>(k))));
  return anneal_starts(model, starts, sch);
}

template <Manifold M>
WeightedMeasure<M> anneal(const M& model, std::size_t m, const AnnealSchedule& sch) {
  return anneal_run(model, m, sch).measure;
}

/// Warm start: restart 0 begins at `initial`, the others at jittered copies of it.
template <Manifold M>
AnnealResult<M> anneal_from(const M& model, const WeightedMeasure<M>& initial, const AnnealSchedule& sch) {
  validate(sch);
  std::vector<WeightedMeasure<M>> starts{initial};
  for (int k = 1; k < sch.restarts; ++k) {
    CounterRng rng(sch.seed, 5000 + static_cast<std::uint64_t>(k));
    WeightedMeasure<M> s = initial;
    const double step = std::min(sch.step_max, sch.step_end * sch.t_start / sch.t_end);
    for (auto& p : s.points) p = model.jitter(p, step, rng);
    starts.push_back(std::move(s));
  }
  return anneal_starts(model, starts, sch);
}

// ---------------------------------------------------------------------------

template <Manifold M>
struct MergeResult {
  WeightedMeasure<M> measure;
  double action_before = 0.0;
  double action_after = 0.0;
  double action_change() const { return action_after - action_before; }
};

/// Single-linkage merge of points closer than `radius` (strict). Weights add, the
/// position is the weighted centroid projected back to the manifold.
template <Manifold M>
MergeResult<M> merge_clusters(const M& model, const WeightedMeasure<M>& m, double radius) {
  if (!(radius >= 0.0)) throw domain_error("merge_clusters: radius must be >= 0");
  const std::size_t n = m.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (model.distance(m.points[i], m.points[j]) < radius) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  MergeResult<M> out;
  out.action_before = action(model, m);
  for (std::size_t root = 0; root < n; ++root) {
    if (find(root) != root) continue;
    std::vector<typename M::point_type> pts;
    std::vector<double> ws;
    double total = 0.0;
    for (std::size_t i = root; i < n; ++i)
      if (find(i) == root) {
        pts.push_back(m.points[i]);
        ws.push_back(m.weights[i]);
        total += m.weights[i];
      }
    if (pts.size() == 1) {
      out.measure.points.push_back(pts[0]);
    } else {
      if (total <= 0.0) std::fill(ws.begin(), ws.end(), 1.0);
      out.measure.points.push_back(model.centroid(pts, ws));
    }
    out.measure.weights.push_back(total);
  }
  out.action_after = action(model, out.measure);
  return out;
}

/// Drop points with weight <= wtol and re-solve the weights on the rest.
template <Manifold M>
WeightedMeasure<M> prune(const M& model, const WeightedMeasure<M>& m, double wtol = 1e-9) {
  WeightedMeasure<M> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.weights[i] > wtol) {
      out.points.push_back(m.points[i]);
      out.weights.push_back(m.weights[i]);
    }
  if (out.empty()) return m;
  renormalize(out);
  reweight(model, out);
  return out.support();
}

/// Greedily remove support points whose removal (with re-solved weights) does not
/// raise the action by more than rel_tol * 8 tau^2. Picks a smallest-support
/// representative when minimizers are degenerate.
template <Manifold M>
WeightedMeasure<M> sparsify(const M& model, WeightedMeasure<M> m, double rel_tol = 1e-9) {
  const double base = action(model, m);
  const double slack = rel_tol * kernel_scale(model);
  bool changed = true;
  while (changed && m.size() > 1) {
    changed = false;
    // Try the lightest points first.
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.weights[a] < m.weights[b]; });
    for (std::size_t drop : order) {
      WeightedMeasure<M> trial;
      for (std::size_t i = 0; i < m.size(); ++i)
        if (i != drop) {
          trial.points.push_back(m.points[i]);
          trial.weights.push_back(m.weights[i]);
        }
      renormalize(trial);
      const WeightSolution sol = reweight(model, trial);
      if (sol.lambda <= base + slack) {
        m = trial.support();
        changed = true;
        break;
      }
    }
  }
  return m;
}

/// Candidate clean-up after annealing: prune, merge, re-solve, prune again.
template <Manifold M>
WeightedMeasure<M> finalize(const M& model, const WeightedMeasure<M>& m, double merge_radius = 1e-3) {
  WeightedMeasure<M> out = prune(model, m);
  out = merge_clusters(model, out, merge_radius).measure;
  renormalize(out);
  return prune(model, out);
}

}  // namespace cvp
