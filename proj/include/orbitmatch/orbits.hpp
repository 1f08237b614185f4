#pragma once

// Orbit generators for the example maps. Integer-slope piecewise-linear maps
// are simulated exactly as shifts on random digit streams; the beta and Gauss
// maps are iterated forward in double precision.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "orbitmatch/core.hpp"
#include "orbitmatch/rng.hpp"

namespace orbitmatch {

/// x -> m x mod 1, Lebesgue measure.
struct ExpandingInteger {
  std::uint32_t m = 2;
  friend bool operator==(const ExpandingInteger&, const ExpandingInteger&) = default;
};
/// T(x) = 2^k (x - 2^-k) on (2^-k, 2^-k+1], Lebesgue measure.
struct DyadicLadder {
  friend bool operator==(const DyadicLadder&, const DyadicLadder&) = default;
};
/// x -> beta x mod 1 with its Parry measure.
struct BetaMap {
  double beta = 1.5;
  friend bool operator==(const BetaMap&, const BetaMap&) = default;
};
/// x -> {1/x} with the Gauss measure dx / ((1+x) log 2).
struct GaussMap {
  friend bool operator==(const GaussMap&, const GaussMap&) = default;
};
/// x -> x + theta on the circle; theta in 128-bit fixed point.
struct Rotation {
  Fixed128 theta = 0;
  friend bool operator==(const Rotation&, const Rotation&) = default;
};
/// Independent expanding maps x_c -> m_c x_c on each torus coordinate.
struct ProductExpanding {
  std::vector<std::uint32_t> factors;
  friend bool operator==(const ProductExpanding&, const ProductExpanding&) = default;
};

using MapSpec = std::variant<ExpandingInteger, DyadicLadder, BetaMap, GaussMap, Rotation, ProductExpanding>;

void validate(const MapSpec& map);
std::size_t map_dimension(const MapSpec& map);
std::string describe(const MapSpec& map);

/// Correlation dimension of the invariant measure: 1 for the interval maps,
/// the number of factors for product maps.
double correlation_dimension_of(const MapSpec& map);

struct OrbitGenConfig {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> burn_in;      // beta: 1000, others: 0
  std::optional<std::size_t> digit_depth;  // digits past each position, in the map's base
  Metric metric = Metric::TorusMax;
};

/// Default digit depth: 96 binary digits' worth in base m.
std::size_t default_digit_depth(std::uint32_t base);

/// Throws InvalidArgument when m^-depth > 2^-60.
void check_digit_depth(std::uint32_t base, std::size_t depth);

/// Orbit {T^i x0}, i < cfg.n, with x0 drawn from rng. cfg.seed is recorded
/// in the origin only.
OrbitCloud generate_orbit(const MapSpec& map, const OrbitGenConfig& cfg, Rng& rng);

/// Same, with rng = Rng(cfg.seed).
OrbitCloud generate_orbit(const MapSpec& map, const OrbitGenConfig& cfg);

/// Orbit of the base-m shift read off a caller-supplied digit stream:
/// point i is the fixed-point value of 0.d_i d_{i+1} ... d_{i+depth-1}.
OrbitCloud expanding_orbit_from_digits(std::uint32_t base, std::span<const std::uint32_t> digits,
                                       std::size_t n, std::size_t depth);

/// I.i.d. Lebesgue points on the d-torus.
OrbitCloud iid_uniform_cloud(std::size_t dim, std::size_t n, Metric metric, Rng& rng);

/// (1 - 1/beta, (1 - 1/beta)^-1): bounds on the Parry density.
std::pair<double, double> parry_density_bounds(double beta);

// ---------------------------------------------------------------------------
// Binary cache format (little-endian):
//   magic "ORBC", u32 version = 1, u32 dimension, u64 n, u32 metric tag,
//   u64 seed, u32 origin-length, origin bytes, then n*dimension u64 words.

void write_orbit_cloud(std::ostream& out, const OrbitCloud& cloud);
OrbitCloud read_orbit_cloud(std::istream& in);
void save_orbit_cloud(const std::string& path, const OrbitCloud& cloud);
OrbitCloud load_orbit_cloud(const std::string& path);

}  // namespace orbitmatch
