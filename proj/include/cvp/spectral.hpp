#pragma once

// Eigenvalues of the integral operator with kernel D against the uniform measure,
// the resulting lower bound, and the coupling thresholds derived from them.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "cvp/errors.hpp"
#include "cvp/manifold.hpp"
#include "cvp/parallel.hpp"
#include "cvp/rng.hpp"

namespace cvp {

struct Spectrum {
  double nu0 = 0.0;
  std::optional<double> nu1;
  std::optional<double> nu2;
};

inline Spectrum spectral_closed_form(const Circle& c) {
  const double t2 = c.tau() * c.tau();
  return {4.0 * t2 - t2 * t2, 2.0 * t2, 0.5 * t2 * t2};
}

inline Spectrum spectral_closed_form(const Sphere& s) {
  const double t2 = s.tau() * s.tau();
  return {4.0 * t2 - 4.0 / 3.0 * t2 * t2, 4.0 / 3.0 * t2, 4.0 / 15.0 * t2 * t2};
}

inline Spectrum spectral_closed_form(const Flag& fl) {
  const double f = fl.f(), t2 = fl.tau() * fl.tau();
  return {2.0 * (3.0 * f + 6.0 * f * t2 - (2.0 + f) * t2 * t2 - 6.0) / (f * (f * f - 1.0)), {}, {}};
}

struct LowerBound {
  double value = 0.0;
  bool valid = false;
};

/// S_min >= nu0 whenever all higher eigenvalues are non-negative.
inline LowerBound nu0_lower_bound(const Circle& c) { return {spectral_closed_form(c).nu0, c.tau() <= 2.0}; }
inline LowerBound nu0_lower_bound(const Sphere& s) {
  return {spectral_closed_form(s).nu0, s.tau() <= std::sqrt(3.0)};
}
/// The flag operator has negative eigenvalues for every tau > 1.
inline LowerBound nu0_lower_bound(const Flag& fl) { return {spectral_closed_form(fl).nu0, false}; }

/// True iff tau > sqrt(2): then no generically timelike minimizer exists.
template <ZonalManifold M>
bool antipodal_obstruction(const M& model) {
  return model.tau() > std::sqrt(2.0);
}

/// Above this coupling the flag manifold has no generically timelike minimizer.
inline double flag_gt_threshold(int f) {
  if (f < 3) throw domain_error("flag_gt_threshold: f must be >= 3");
  const double ff = f;
  return std::sqrt((3.0 * ff + 2.0 * std::sqrt(3.0 * (ff * ff - 1.0))) / (2.0 + ff));
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Mean of D(x, y) over n independent Haar pairs. Pair i is drawn from the stream
/// (seed, i), and partial sums are combined in a fixed order, so the result does not
/// depend on the thread count.
inline MonteCarloEstimate nu0_monte_carlo(const Flag& fl, std::size_t n, std::uint64_t seed, unsigned threads = 0) {
  if (n < 2) throw domain_error("nu0_monte_carlo: need n >= 2 samples");
  constexpr std::size_t kChunks = 64;
  std::vector<double> sum(kChunks, 0.0), sum_sq(kChunks, 0.0);
  parallel_for(kChunks, threads, [&](std::size_t c) {
    const std::size_t lo = n * c / kChunks, hi = n * (c + 1) / kChunks;
    for (std::size_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, i);
      const FlagPoint x = fl.sample(rng), y = fl.sample(rng);
      const double d = fl.kernel(x, y);
      sum[c] += d;
      sum_sq[c] += d * d;
    }
  });
  double s = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < kChunks; ++c) {
    s += sum[c];
    s2 += sum_sq[c];
  }
  const double nn = static_cast<double>(n);
  const double mean = s / nn;
  const double var = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn), n};
}

}  // namespace cvp
