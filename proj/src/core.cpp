#include "orbitmatch/core.hpp"

#include <bit>
#include <limits>
#include <string>

#include "orbitmatch/error.hpp"

namespace orbitmatch {

Fixed64 real_to_fixed(double x) {
  double frac = x - std::floor(x);
  double scaled = std::ldexp(frac, 64);
  if (scaled >= 18446744073709551616.0) return std::numeric_limits<Fixed64>::max();
  return static_cast<Fixed64>(scaled);
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::TorusMax: return "max";
    case Metric::TorusEuclid: return "euclid";
    case Metric::Symbolic: return "symbolic";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  if (name == "max") return Metric::TorusMax;
  if (name == "euclid") return Metric::TorusEuclid;
  if (name == "symbolic") return Metric::Symbolic;
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

SymbolicSequence::SymbolicSequence(std::uint32_t alphabet_size, std::vector<std::uint32_t> symbols)
    : alphabet_size_(alphabet_size), symbols_(std::move(symbols)) {
  if (alphabet_size_ == 0) throw InvalidArgument("alphabet size must be positive");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i] >= alphabet_size_) {
      throw InvalidArgument("symbol " + std::to_string(symbols_[i]) + " at position " +
                            std::to_string(i) + " outside alphabet of size " +
                            std::to_string(alphabet_size_));
    }
  }
}

SymbolicSequence SymbolicSequence::from_string(std::string_view text, std::string_view alphabet) {
  std::vector<std::uint32_t> symbols;
  symbols.reserve(text.size());
  for (char c : text) {
    auto pos = alphabet.find(c);
    if (pos == std::string_view::npos) {
      throw InvalidArgument(std::string("character '") + c + "' not in alphabet");
    }
    symbols.push_back(static_cast<std::uint32_t>(pos));
  }
  return SymbolicSequence(static_cast<std::uint32_t>(alphabet.size()), std::move(symbols));
}

SymbolicDistance symbolic_distance(const SymbolicSequence& x, const SymbolicSequence& y) {
  if (x.empty() || y.empty()) throw InvalidArgument("symbolic_distance needs nonempty sequences");
  if (x.alphabet_size() != y.alphabet_size()) {
    throw AlphabetMismatch("alphabet sizes differ: " + std::to_string(x.alphabet_size()) +
                           " vs " + std::to_string(y.alphabet_size()));
  }
  const std::size_t len = std::min(x.size(), y.size());
  auto xs = x.symbols();
  auto ys = y.symbols();
  auto [ix, iy] = std::mismatch(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(len), ys.begin());
  std::size_t k = static_cast<std::size_t>(ix - xs.begin());
  return {k, std::exp(-static_cast<double>(k))};
}

// ---------------------------------------------------------------------------

DistKey distance_key(std::span<const Fixed64> p, std::span<const Fixed64> q, Metric metric) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("points of dimension " + std::to_string(p.size()) + " and " +
                            std::to_string(q.size()));
  }
  switch (metric) {
    case Metric::TorusMax: {
      Fixed64 best = 0;
      for (std::size_t c = 0; c < p.size(); ++c) best = std::max(best, circle_norm(p[c] - q[c]));
      return DistKey{best};
    }
    case Metric::TorusEuclid: {
      if (p.size() > kMaxEuclidDim) {
        throw DimensionMismatch("euclidean torus metric supports dimension <= 3");
      }
      u128 sum = 0;
      for (std::size_t c = 0; c < p.size(); ++c) {
        u128 d = circle_norm(p[c] - q[c]);
        sum += d * d;
      }
      return DistKey{sum};
    }
    case Metric::Symbolic: break;
  }
  throw MetricMismatch("symbolic metric does not apply to torus points");
}

namespace {

long double u128_to_ld(u128 v) {
  return std::ldexp(static_cast<long double>(static_cast<std::uint64_t>(v >> 64)), 64) +
         static_cast<long double>(static_cast<std::uint64_t>(v));
}

// ceil(m * 2^e) for m < 2^106, saturating.
u128 ceil_scaled(u128 m, int e) {
  if (m == 0) return 0;
  if (e >= 0) {
    auto hi = static_cast<std::uint64_t>(m >> 64);
    int bits = hi != 0 ? 128 - std::countl_zero(hi)
                       : 64 - std::countl_zero(static_cast<std::uint64_t>(m));
    if (bits + e >= 128) return ~u128{0};
    return m << e;
  }
  int s = -e;
  if (s >= 120) return 1;
  u128 one = 1;
  return (m + (one << s) - 1) >> s;
}

}  // namespace

double key_to_real(DistKey key, Metric metric) {
  switch (metric) {
    case Metric::TorusMax:
      return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(key.value)), -64);
    case Metric::TorusEuclid:
      return static_cast<double>(std::ldexp(std::sqrt(u128_to_ld(key.value)), -64));
    case Metric::Symbolic: break;
  }
  throw MetricMismatch("symbolic metric has no torus key");
}

DistKey radius_to_key(double r, Metric metric) {
  if (!(r > 0)) return DistKey{0};
  if (std::isinf(r)) return kMaxDistKey;
  int ex = 0;
  double f = std::frexp(r, &ex);  // r = f * 2^ex, f in [0.5, 1)
  auto mant = static_cast<std::uint64_t>(std::ldexp(f, 53));
  int e = ex - 53 + 64;           // r * 2^64 = mant * 2^e
  switch (metric) {
    case Metric::TorusMax: return DistKey{ceil_scaled(mant, e)};
    case Metric::TorusEuclid: {
      u128 sq = u128{mant} * mant;
      return DistKey{ceil_scaled(sq, 2 * e)};
    }
    case Metric::Symbolic: break;
  }
  throw MetricMismatch("symbolic metric has no torus key");
}

DistKey axis_bound_key(Fixed64 axis, Metric metric) {
  if (metric == Metric::TorusEuclid) return DistKey{u128{axis} * axis};
  return DistKey{axis};
}

double torus_distance(const TorusPoint& p, const TorusPoint& q, Metric metric) {
  if (p.dim() == 0) throw DimensionMismatch("torus points need dimension >= 1");
  return key_to_real(distance_key(p.coords, q.coords, metric), metric);
}

// ---------------------------------------------------------------------------

OrbitCloud::OrbitCloud(std::size_t dim, Metric metric, std::vector<Fixed64> coords, OrbitOrigin origin)
    : dim_(dim), metric_(metric), coords_(std::move(coords)), origin_(std::move(origin)) {
  if (dim_ == 0) throw DimensionMismatch("orbit cloud dimension must be >= 1");
  if (coords_.size() % dim_ != 0) throw InvalidArgument("coordinate count not a multiple of dimension");
  if (metric_ == Metric::Symbolic) throw MetricMismatch("orbit clouds use a torus metric");
  if (metric_ == Metric::TorusEuclid && dim_ > kMaxEuclidDim) {
    throw DimensionMismatch("euclidean torus metric supports dimension <= 3");
  }
}

OrbitCloud OrbitCloud::from_points(const std::vector<TorusPoint>& points, Metric metric,
                                   OrbitOrigin origin) {
  if (points.empty()) throw InvalidArgument("from_points needs at least one point");
  const std::size_t d = points.front().dim();
  std::vector<Fixed64> coords;
  coords.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.dim() != d) throw DimensionMismatch("points of mixed dimension");
    coords.insert(coords.end(), p.coords.begin(), p.coords.end());
  }
  return OrbitCloud(d, metric, std::move(coords), std::move(origin));
}

OrbitCloud OrbitCloud::prefix(std::size_t n) const {
  if (n > size()) throw InvalidArgument("prefix longer than cloud");
  return OrbitCloud(dim_, metric_, {coords_.begin(), coords_.begin() + static_cast<std::ptrdiff_t>(n * dim_)},
                    origin_);
}

void require_compatible(const OrbitCloud& x, const OrbitCloud& y) {
  if (x.metric() != y.metric()) {
    throw MetricMismatch("clouds use different metrics: " + std::string(metric_name(x.metric())) +
                         " vs " + std::string(metric_name(y.metric())));
  }
  if (x.dim() != y.dim()) {
    throw DimensionMismatch("clouds of dimension " + std::to_string(x.dim()) + " and " +
                            std::to_string(y.dim()));
  }
}

// ---------------------------------------------------------------------------

Schedule::Schedule(std::vector<std::size_t> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("schedule is empty");
  if (values_.front() < 2) throw InvalidArgument("schedule must start at n >= 2");
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] <= values_[i - 1]) throw InvalidArgument("schedule must be strictly increasing");
  }
}

Schedule geometric_schedule(std::size_t n_min, std::size_t n_max, double ratio) {
  if (n_min < 2 || n_min >= n_max) throw InvalidArgument("geometric_schedule needs 2 <= n_min < n_max");
  if (!(ratio > 1.0)) throw InvalidArgument("geometric_schedule needs ratio > 1");
  std::vector<std::size_t> values{n_min};
  for (int j = 1;; ++j) {
    double v = std::round(static_cast<double>(n_min) * std::pow(ratio, j));
    if (v >= static_cast<double>(n_max)) break;
    auto n = static_cast<std::size_t>(v);
    if (n > values.back()) values.push_back(n);
  }
  if (values.size() > 1 &&
      static_cast<double>(n_max) / static_cast<double>(values.back()) < std::sqrt(ratio)) {
    values.pop_back();
  }
  values.push_back(n_max);
  return Schedule(std::move(values));
}

}  // namespace orbitmatch
