#pragma once

// Shared sequence and torus types, exact distance keys, and schedules.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace orbitmatch {

using u128 = unsigned __int128;

/// A point of the circle [0,1) stored as a numerator over 2^64.
using Fixed64 = std::uint64_t;
/// A point of the circle [0,1) stored as a numerator over 2^128.
using Fixed128 = u128;

inline double fixed_to_real(Fixed64 v) { return std::ldexp(static_cast<double>(v), -64); }

inline double fixed128_to_real(Fixed128 v) {
  return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(v >> 64)), -64) +
         std::ldexp(static_cast<double>(static_cast<std::uint64_t>(v)), -128);
}

/// Fractional part of x, floored onto the 2^-64 grid.
Fixed64 real_to_fixed(double x);

/// Distance to the nearest integer, on the 2^-64 grid.
inline Fixed64 circle_norm(Fixed64 d) { return std::min<Fixed64>(d, Fixed64{0} - d); }
inline Fixed128 circle_norm128(Fixed128 d) { return std::min<Fixed128>(d, Fixed128{0} - d); }

enum class Metric { TorusMax, TorusEuclid, Symbolic };

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);

// ---------------------------------------------------------------------------
// Symbolic sequences

class SymbolicSequence {
 public:
  SymbolicSequence(std::uint32_t alphabet_size, std::vector<std::uint32_t> symbols);

  /// Maps each character of `text` to its position in `alphabet`.
  static SymbolicSequence from_string(std::string_view text, std::string_view alphabet);

  std::uint32_t alphabet_size() const noexcept { return alphabet_size_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  std::span<const std::uint32_t> symbols() const noexcept { return symbols_; }
  std::uint32_t operator[](std::size_t i) const { return symbols_[i]; }

  friend bool operator==(const SymbolicSequence&, const SymbolicSequence&) = default;

 private:
  std::uint32_t alphabet_size_;
  std::vector<std::uint32_t> symbols_;
};

/// d(x,y) = e^-k with k the first index of disagreement. k is kept as an
/// integer so large agreements do not underflow.
struct SymbolicDistance {
  std::size_t k = 0;
  double value = 1.0;
};

SymbolicDistance symbolic_distance(const SymbolicSequence& x, const SymbolicSequence& y);

// ---------------------------------------------------------------------------
// Torus points and distances

struct TorusPoint {
  std::vector<Fixed64> coords;

  std::size_t dim() const noexcept { return coords.size(); }
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// Exact, totally ordered stand-in for a torus distance.
///   TorusMax:    max circle distance, units of 2^-64.
///   TorusEuclid: sum of squared circle distances, units of 2^-128.
struct DistKey {
  u128 value = 0;
  friend auto operator<=>(const DistKey&, const DistKey&) = default;
};

inline constexpr DistKey kMaxDistKey{~u128{0}};

/// Largest dimension the Euclidean key can hold without overflow.
inline constexpr std::size_t kMaxEuclidDim = 3;

DistKey distance_key(std::span<const Fixed64> p, std::span<const Fixed64> q, Metric metric);
double key_to_real(DistKey key, Metric metric);

/// Smallest key K with (key < K) <=> (distance < r), exact in fixed point.
DistKey radius_to_key(double r, Metric metric);

/// Key of a per-axis lower bound `axis` (units of 2^-64).
DistKey axis_bound_key(Fixed64 axis, Metric metric);

double torus_distance(const TorusPoint& p, const TorusPoint& q, Metric metric);

// ---------------------------------------------------------------------------
// Orbit clouds

struct OrbitOrigin {
  std::string map;           // e.g. "expanding(m=2)"
  std::uint64_t seed = 0;
  bool isometric = false;    // rotations: d(T^i x, T^j y) depends on i - j only
  std::size_t retries = 0;   // resampled initial points (discontinuity hits)

  friend bool operator==(const OrbitOrigin&, const OrbitOrigin&) = default;
};

class OrbitCloud {
 public:
  OrbitCloud() = default;
  OrbitCloud(std::size_t dim, Metric metric, std::vector<Fixed64> coords, OrbitOrigin origin = {});

  static OrbitCloud from_points(const std::vector<TorusPoint>& points, Metric metric,
                                OrbitOrigin origin = {});

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  Metric metric() const noexcept { return metric_; }
  const OrbitOrigin& origin() const noexcept { return origin_; }

  std::span<const Fixed64> point(std::size_t i) const {
    return std::span<const Fixed64>(coords_).subspan(i * dim_, dim_);
  }
  TorusPoint point_copy(std::size_t i) const {
    auto p = point(i);
    return TorusPoint{{p.begin(), p.end()}};
  }
  std::span<const Fixed64> coords() const noexcept { return coords_; }

  /// First n points, same metric and origin.
  OrbitCloud prefix(std::size_t n) const;

  friend bool operator==(const OrbitCloud&, const OrbitCloud&) = default;

 private:
  std::size_t dim_ = 0;
  Metric metric_ = Metric::TorusMax;
  std::vector<Fixed64> coords_;
  OrbitOrigin origin_;
};

/// Throws MetricMismatch / DimensionMismatch unless the clouds are comparable.
void require_compatible(const OrbitCloud& x, const OrbitCloud& y);

// ---------------------------------------------------------------------------
// Schedules

class Schedule {
 public:
  explicit Schedule(std::vector<std::size_t> values);

  std::span<const std::size_t> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t operator[](std::size_t i) const { return values_[i]; }
  std::size_t front() const { return values_.front(); }
  std::size_t back() const { return values_.back(); }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<std::size_t> values_;
};

/// n_min * ratio^j, rounded and deduplicated, closed off by n_max. A last
/// geometric value within a factor sqrt(ratio) of n_max is merged into it.
Schedule geometric_schedule(std::size_t n_min, std::size_t n_max, double ratio);

}  // namespace orbitmatch
