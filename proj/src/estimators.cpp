#include "orbitmatch/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orbitmatch/error.hpp"
#include "orbitmatch/parallel.hpp"
#include "orbitmatch/rng.hpp"
#include "orbitmatch/spatial_index.hpp"

namespace orbitmatch {

namespace {

constexpr std::uint64_t kRadiiSampleSeed = 0x6f726269746d6174ULL;
constexpr std::size_t kAllPairsLimit = 2000;
constexpr std::size_t kSampledPairs = 200000;

Fixed64 axis_reach(double r) {
  if (r >= 0.5) return Fixed64{1} << 63;
  return static_cast<Fixed64>(radius_to_key(r, Metric::TorusMax).value);
}

TorusGrid build_grid(const OrbitCloud& cloud, double r_max) {
  const unsigned bits = TorusGrid::bits_for_radius(axis_reach(r_max), cloud.dim(), cloud.size());
  TorusGrid grid(cloud.dim(), cloud.metric(), bits);
  for (std::size_t i = 0; i < cloud.size(); ++i) grid.insert(cloud.point(i), static_cast<std::uint32_t>(i));
  return grid;
}

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw InvalidArgument("radii are empty");
  for (std::size_t s = 0; s < radii.size(); ++s) {
    if (!(radii[s] > 0)) throw InvalidArgument("radii must be positive");
    if (s > 0 && !(radii[s] < radii[s - 1])) throw InvalidArgument("radii must be strictly decreasing");
  }
}

double quantile(std::vector<double>& v, double q) {
  auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace

CorrelationCurve correlation_sum(const OrbitCloud& cloud, const std::vector<double>& radii,
                                 const CorrelationOptions& options) {
  check_radii(radii);
  const std::size_t n = cloud.size();
  if (n < 2) throw InvalidArgument("correlation_sum needs at least 2 points");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("cloud too large");

  std::vector<DistKey> limits;
  for (double r : radii) limits.push_back(radius_to_key(r, cloud.metric()));
  const TorusGrid grid = build_grid(cloud, radii.front());
  const Fixed64 reach = axis_reach(radii.front());
  const std::size_t gap = std::max<std::size_t>(options.theiler, 1);

  // hist[b] counts pairs below exactly the first b radii.
  const unsigned workers = std::max(1u, options.workers);
  const std::size_t blocks = std::min<std::size_t>(n, 64 * workers);
  std::vector<std::vector<std::uint64_t>> hist(blocks, std::vector<std::uint64_t>(radii.size() + 1, 0));
  parallel_for(blocks, workers, [&](std::size_t b) {
    auto& h = hist[b];
    for (std::size_t i = b; i < n; i += blocks) {
      grid.for_each_within(cloud.point(i), reach, limits.front(), [&](std::uint32_t j, DistKey key) {
        if (j < i + gap) return;
        auto it = std::partition_point(limits.begin(), limits.end(), [&](DistKey lim) { return key < lim; });
        ++h[static_cast<std::size_t>(it - limits.begin())];
      });
    }
  });

  CorrelationCurve curve;
  curve.radii = radii;
  curve.n_points = n;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t dropped = gap >= n ? total
                                         : static_cast<std::uint64_t>(gap - 1) * n - static_cast<std::uint64_t>(gap) * (gap - 1) / 2;
  curve.total_pairs = total - dropped;
  curve.pair_counts.assign(radii.size(), 0);
  for (const auto& h : hist) {
    std::uint64_t above = 0;
    for (std::size_t s = radii.size(); s-- > 0;) {
      above += h[s + 1];
      curve.pair_counts[s] += above;
    }
  }
  for (auto c : curve.pair_counts) {
    curve.c_values.push_back(curve.total_pairs == 0 ? 0.0
                                                    : static_cast<double>(c) / static_cast<double>(curve.total_pairs));
  }
  return curve;
}

std::vector<double> default_radii(const OrbitCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) throw InvalidArgument("default_radii needs at least 2 points");
  std::vector<double> dist;
  if (n <= kAllPairsLimit) {
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        dist.push_back(key_to_real(distance_key(cloud.point(i), cloud.point(j), cloud.metric()), cloud.metric()));
      }
    }
  } else {
    Rng rng(kRadiiSampleSeed);
    dist.reserve(kSampledPairs);
    while (dist.size() < kSampledPairs) {
      auto i = static_cast<std::size_t>(rng.uniform_below(n));
      auto j = static_cast<std::size_t>(rng.uniform_below(n));
      if (i == j) continue;
      dist.push_back(key_to_real(distance_key(cloud.point(i), cloud.point(j), cloud.metric()), cloud.metric()));
    }
  }
  const double hi = quantile(dist, 0.5);
  const double lo = quantile(dist, 0.001);
  if (!(hi > 0)) throw NumericDegeneracy("cloud has no positive pairwise distances");
  const double step = std::pow(2.0, -0.25);
  std::vector<double> radii;
  for (double r = hi; radii.size() < 400; r *= step) {
    radii.push_back(r);
    if (r <= lo) break;
  }
  return radii;
}

SlopeFit correlation_dimension(const CorrelationCurve& curve, const DimensionWindow& window) {
  std::vector<double> xs, ys;
  double r_min = 0, r_max = 0;
  for (std::size_t s = 0; s < curve.radii.size(); ++s) {
    const double r = curve.radii[s];
    if (window.r_lo && r < *window.r_lo) continue;
    if (window.r_hi && r > *window.r_hi) continue;
    if (curve.pair_counts[s] < std::max<std::uint64_t>(window.min_pairs, 1)) continue;
    if (curve.c_values[s] > window.max_fraction) continue;
    if (xs.empty()) r_max = r;
    r_min = r;
    xs.push_back(std::log(r));
    ys.push_back(std::log(curve.c_values[s]));
  }
  if (xs.size() < 3) {
    throw FitError("only " + std::to_string(xs.size()) + " radii inside the scaling window", xs.size());
  }
  SlopeFit fit = fit_line(xs, ys);
  fit.window_lo = r_min;
  fit.window_hi = r_max;
  return fit;
}

BallMomentReport ball_moment_check(const OrbitCloud& cloud, double r) {
  const std::size_t n = cloud.size();
  if (n < 2) throw InvalidArgument("ball_moment_check needs at least 2 points");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("cloud too large");
  if (!(r > 0)) throw InvalidArgument("ball_moment_check needs r > 0");
  const DistKey limit = radius_to_key(r, cloud.metric());
  const TorusGrid grid = build_grid(cloud, r);
  const Fixed64 reach = axis_reach(r);
  // c_y = #{x : d(x, y) < r}, self included.
  u128 sum = 0, sum_sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t c = 0;
    grid.for_each_within(cloud.point(i), reach, limit, [&](std::uint32_t, DistKey) { ++c; });
    sum += c;
    sum_sq += u128{c} * c;
  }
  const double nn = static_cast<double>(n);
  BallMomentReport rep;
  rep.r = r;
  rep.first = static_cast<double>(sum) / (nn * nn);
  rep.second = static_cast<double>(sum_sq) / (nn * nn * nn);
  rep.ratio = rep.second / std::pow(rep.first, 1.5);
  // second >= first^2  <=>  n * sum_sq >= sum^2, exact since sum <= n^2 < 2^64.
  rep.cauchy_schwarz = u128{n} * sum_sq >= sum * sum;
  return rep;
}

BallMomentSweep ball_moment_sweep(const OrbitCloud& cloud, const std::vector<double>& radii) {
  check_radii(radii);
  BallMomentSweep sweep;
  for (double r : radii) {
    sweep.reports.push_back(ball_moment_check(cloud, r));
    sweep.k_empirical = std::max(sweep.k_empirical, sweep.reports.back().ratio);
  }
  return sweep;
}

namespace {

ExponentSeries fit_series(ExponentSeries s, const std::vector<double>& xs_all, const std::vector<double>& ys_all) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.n.size(); ++i) {
    if (!s.usable[i]) continue;
    xs.push_back(xs_all[i]);
    ys.push_back(ys_all[i]);
  }
  if (xs.size() < 4) {
    throw FitError("profile has " + std::to_string(xs.size()) + " usable points, need 4", xs.size());
  }
  std::vector<double> fx, fy;
  for (auto i : upper_half(xs)) {
    fx.push_back(xs[i]);
    fy.push_back(ys[i]);
  }
  s.fit = fit_line(fx, fy);
  return s;
}

}  // namespace

ExponentSeries exponent_series(const MinDistProfile& profile) {
  ExponentSeries s;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < profile.schedule.size(); ++i) {
    const std::size_t n = profile.schedule[i];
    const double m = profile.m_values[i];
    const bool ok = m > 0 && !profile.exact_zero[i];
    s.n.push_back(n);
    s.usable.push_back(ok);
    s.exponents.push_back(ok ? std::log(m) / -std::log(static_cast<double>(n))
                             : std::numeric_limits<double>::quiet_NaN());
    xs.push_back(-std::log(static_cast<double>(n)));
    ys.push_back(ok ? std::log(m) : 0.0);
  }
  return fit_series(std::move(s), xs, ys);
}

ExponentSeries exponent_series(const MatchProfile& profile) {
  ExponentSeries s;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < profile.schedule.size(); ++i) {
    const std::size_t n = profile.schedule[i];
    const double log_n = std::log(static_cast<double>(n));
    s.n.push_back(n);
    s.usable.push_back(true);
    s.exponents.push_back(static_cast<double>(profile.m_values[i]) / log_n);
    xs.push_back(log_n);
    ys.push_back(static_cast<double>(profile.m_values[i]));
  }
  return fit_series(std::move(s), xs, ys);
}

}  // namespace orbitmatch
