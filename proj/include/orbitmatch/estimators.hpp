#pragma once

// Correlation sums and dimension fits, the ball-measure moment diagnostic,
// and exponent fits for m_n and M_n profiles.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "orbitmatch/core.hpp"
#include "orbitmatch/fit.hpp"
#include "orbitmatch/matching.hpp"
#include "orbitmatch/mindist.hpp"

namespace orbitmatch {

struct CorrelationCurve {
  std::vector<double> radii;               // decreasing
  std::vector<double> c_values;            // pair_counts / total_pairs
  std::vector<std::uint64_t> pair_counts;  // #{i < j : d(p_i, p_j) < r}
  std::uint64_t total_pairs = 0;           // eligible pairs after the Theiler cut
  std::size_t n_points = 0;
};

struct CorrelationOptions {
  std::size_t theiler = 0;  // drop pairs with |i - j| < theiler
  unsigned workers = 1;
};

/// C(r) = #{i < j : d(p_i, p_j) < r} / #{eligible pairs}, for all radii in
/// one sweep over a torus grid. Counts are exact integers.
CorrelationCurve correlation_sum(const OrbitCloud& cloud, const std::vector<double>& radii,
                                 const CorrelationOptions& options = {});

/// Geometric radii, ratio 2^(1/4), from the median pairwise distance down to
/// the 0.1-percentile. Distances come from all pairs when N <= 2000, else
/// from 2e5 pairs drawn with a fixed seed.
std::vector<double> default_radii(const OrbitCloud& cloud);

struct DimensionWindow {
  std::optional<double> r_lo;
  std::optional<double> r_hi;
  std::uint64_t min_pairs = 100;   // statistical floor
  double max_fraction = 0.2;       // saturation ceiling on C(r)
};

/// Least squares of log C(r) on log r over the window. window_lo/hi of the
/// result are the extreme radii used. Throws FitError below 3 usable radii.
SlopeFit correlation_dimension(const CorrelationCurve& curve, const DimensionWindow& window = {});

struct BallMomentReport {
  double r = 0;
  double first = 0;   // mean of mu(B(y, r)) over the cloud, self included
  double second = 0;  // mean of mu(B(y, r))^2
  double ratio = 0;   // second / first^(3/2)
  bool cauchy_schwarz = true;  // second >= first^2, checked on the integer counts
};

BallMomentReport ball_moment_check(const OrbitCloud& cloud, double r);

struct BallMomentSweep {
  std::vector<BallMomentReport> reports;
  double k_empirical = 0;  // max ratio over the sweep
};

BallMomentSweep ball_moment_sweep(const OrbitCloud& cloud, const std::vector<double>& radii);

struct ExponentSeries {
  std::vector<std::size_t> n;
  std::vector<double> exponents;   // log m_n / (-log n), or M_n / log n
  std::vector<bool> usable;
  SlopeFit fit;                    // over the upper half of the schedule
};

/// Slope of log m_n on -log n over the upper half, exact-zero points dropped.
/// Throws FitError when fewer than 4 usable points remain.
ExponentSeries exponent_series(const MinDistProfile& profile);

/// Slope of M_n on log n over the upper half.
ExponentSeries exponent_series(const MatchProfile& profile);

}  // namespace orbitmatch
