#include "orbitmatch/orbits.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "orbitmatch/error.hpp"

namespace orbitmatch {

namespace {

constexpr std::size_t kMaxRetries = 64;

std::string hex128(Fixed128 v) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 124; shift >= 0; shift -= 4) s += digits[static_cast<unsigned>((v >> shift) & 0xF)];
  return s;
}

/// Packed MSB-first bit stream drawn word by word from an Rng.
class BitStream {
 public:
  explicit BitStream(Rng& rng) : rng_(rng) {}

  void ensure(std::size_t bits) {
    while (words_.size() * 64 < bits) words_.push_back(rng_.next());
  }
  bool bit(std::size_t pos) {
    ensure(pos + 1);
    return (words_[pos / 64] >> (63 - pos % 64)) & 1u;
  }
  /// Value of bits pos .. pos+63 as a 64-bit fraction.
  Fixed64 window(std::size_t pos) {
    ensure(pos + 128);
    const std::size_t w = pos / 64, s = pos % 64;
    if (s == 0) return words_[w];
    return (words_[w] << s) | (words_[w + 1] >> (64 - s));
  }
  /// First position >= pos holding a 1.
  std::size_t next_one(std::size_t pos) {
    for (;;) {
      ensure(pos + 1);
      const std::size_t w = pos / 64, s = pos % 64;
      std::uint64_t rest = words_[w] << s;
      if (rest != 0) return pos + static_cast<std::size_t>(std::countl_zero(rest));
      pos = (w + 1) * 64;
    }
  }

 private:
  Rng& rng_;
  std::vector<std::uint64_t> words_;
};

Fixed64 truncate_bits(Fixed64 v, std::size_t depth) {
  if (depth >= 64) return v;
  return depth == 0 ? 0 : v & ~((Fixed64{1} << (64 - depth)) - 1);
}

/// Coordinates of the base-m shift orbit, one coordinate stream.
std::vector<Fixed64> expanding_coordinates(std::uint32_t base, std::size_t n, std::size_t depth, Rng& rng) {
  std::vector<Fixed64> out(n);
  if (base == 2) {
    BitStream bits(rng);
    bits.ensure(n + depth);
    for (std::size_t i = 0; i < n; ++i) out[i] = truncate_bits(bits.window(i), depth);
    return out;
  }
  std::vector<std::uint32_t> digits(n + depth - 1);
  for (auto& d : digits) d = static_cast<std::uint32_t>(rng.uniform_below(base));
  auto cloud = expanding_orbit_from_digits(base, digits, n, depth);
  auto c = cloud.coords();
  return {c.begin(), c.end()};
}

std::size_t effective_depth(std::uint32_t base, const OrbitGenConfig& cfg) {
  std::size_t depth = cfg.digit_depth.value_or(default_digit_depth(base));
  check_digit_depth(base, depth);
  return depth;
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const MapSpec& map) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExpandingInteger>) {
          if (m.m < 2) throw InvalidArgument("expanding map needs m >= 2");
        } else if constexpr (std::is_same_v<T, BetaMap>) {
          if (!(m.beta > 1.0) || !std::isfinite(m.beta)) throw InvalidArgument("beta map needs beta > 1");
        } else if constexpr (std::is_same_v<T, ProductExpanding>) {
          if (m.factors.empty()) throw InvalidArgument("product map needs at least one factor");
          for (auto f : m.factors) {
            if (f < 2) throw InvalidArgument("product map factors must be >= 2");
          }
        } else if constexpr (std::is_same_v<T, Rotation>) {
          if (m.theta == 0) throw InvalidArgument("rotation angle must be nonzero");
        }
      },
      map);
}

std::size_t map_dimension(const MapSpec& map) {
  if (auto* p = std::get_if<ProductExpanding>(&map)) return p->factors.size();
  return 1;
}

double correlation_dimension_of(const MapSpec& map) { return static_cast<double>(map_dimension(map)); }

std::string describe(const MapSpec& map) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExpandingInteger>) os << "expanding(m=" << m.m << ")";
        else if constexpr (std::is_same_v<T, DyadicLadder>) os << "ladder";
        else if constexpr (std::is_same_v<T, BetaMap>) os << "beta(beta=" << m.beta << ")";
        else if constexpr (std::is_same_v<T, GaussMap>) os << "gauss";
        else if constexpr (std::is_same_v<T, Rotation>) os << "rotation(theta=" << hex128(m.theta) << ")";
        else {
          os << "product(";
          for (std::size_t i = 0; i < m.factors.size(); ++i) os << (i ? "," : "") << m.factors[i];
          os << ")";
        }
      },
      map);
  return os.str();
}

std::size_t default_digit_depth(std::uint32_t base) {
  return static_cast<std::size_t>(std::ceil(96.0 / std::log2(static_cast<double>(base))));
}

void check_digit_depth(std::uint32_t base, std::size_t depth) {
  if (static_cast<double>(depth) * std::log2(static_cast<double>(base)) < 60.0) {
    throw InvalidArgument("digit_depth " + std::to_string(depth) + " in base " + std::to_string(base) +
                          " leaves truncation error above 2^-60");
  }
}

OrbitCloud expanding_orbit_from_digits(std::uint32_t base, std::span<const std::uint32_t> digits,
                                       std::size_t n, std::size_t depth) {
  if (base < 2) throw InvalidArgument("digit base must be >= 2");
  if (depth == 0 || digits.size() < n + depth - 1) {
    throw InvalidArgument("digit stream too short for n points at this depth");
  }
  std::vector<Fixed64> coords(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Horner from the deepest digit: v <- (d * 2^64 + v) / m keeps
    // v = floor(2^64 * 0.d_j ... d_{depth-1}) exactly.
    u128 v = 0;
    for (std::size_t j = depth; j-- > 0;) {
      const std::uint32_t d = digits[i + j];
      if (d >= base) throw InvalidArgument("digit outside base");
      v = ((u128{d} << 64) | v) / base;
    }
    coords[i] = static_cast<Fixed64>(v);
  }
  return OrbitCloud(1, Metric::TorusMax, std::move(coords),
                    OrbitOrigin{"expanding(m=" + std::to_string(base) + ")", 0, false, 0});
}

OrbitCloud generate_orbit(const MapSpec& map, const OrbitGenConfig& cfg) {
  Rng rng(cfg.seed);
  return generate_orbit(map, cfg, rng);
}

OrbitCloud generate_orbit(const MapSpec& map, const OrbitGenConfig& cfg, Rng& rng) {
  validate(map);
  if (cfg.n == 0) throw InvalidArgument("orbit length n must be >= 1");
  OrbitOrigin origin{describe(map), cfg.seed, false, 0};
  const std::size_t n = cfg.n;

  if (auto* e = std::get_if<ExpandingInteger>(&map)) {
    auto coords = expanding_coordinates(e->m, n, effective_depth(e->m, cfg), rng);
    return OrbitCloud(1, cfg.metric, std::move(coords), origin);
  }
  if (auto* p = std::get_if<ProductExpanding>(&map)) {
    const std::size_t d = p->factors.size();
    std::vector<std::vector<Fixed64>> axes;
    for (std::size_t c = 0; c < d; ++c) {
      Rng axis_rng(rng.next());
      axes.push_back(expanding_coordinates(p->factors[c], n, effective_depth(p->factors[c], cfg), axis_rng));
    }
    std::vector<Fixed64> coords(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) coords[i * d + c] = axes[c][i];
    }
    return OrbitCloud(d, cfg.metric, std::move(coords), origin);
  }
  if (std::holds_alternative<DyadicLadder>(map)) {
    // T shifts the binary expansion past its first 1-bit.
    const std::size_t depth = effective_depth(2, cfg);
    BitStream bits(rng);
    std::vector<Fixed64> coords(n);
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bits.ensure(start + depth);
      coords[i] = truncate_bits(bits.window(start), depth);
      start = bits.next_one(start) + 1;
    }
    return OrbitCloud(1, cfg.metric, std::move(coords), origin);
  }
  if (auto* r = std::get_if<Rotation>(&map)) {
    const auto step = static_cast<Fixed64>(r->theta >> 64);
    const Fixed64 x0 = rng.next();
    std::vector<Fixed64> coords(n);
    Fixed64 x = x0;
    for (std::size_t i = 0; i < n; ++i, x += step) coords[i] = x;
    origin.isometric = true;
    return OrbitCloud(1, cfg.metric, std::move(coords), origin);
  }
  if (auto* b = std::get_if<BetaMap>(&map)) {
    if (b->beta == std::floor(b->beta) && b->beta <= 4294967295.0) {
      // Integer beta is the m-adic shift; Parry measure is Lebesgue.
      const auto m = static_cast<std::uint32_t>(b->beta);
      auto coords = expanding_coordinates(m, n, effective_depth(m, cfg), rng);
      return OrbitCloud(1, cfg.metric, std::move(coords), origin);
    }
  }

  // Forward iteration in double precision (beta, Gauss).
  const bool gauss = std::holds_alternative<GaussMap>(map);
  const double beta = gauss ? 0.0 : std::get<BetaMap>(map).beta;
  const std::size_t burn_in = cfg.burn_in.value_or(gauss ? 0 : 1000);
  auto step = [&](double x) {
    double y = gauss ? 1.0 / x : beta * x;
    return y - std::floor(y);
  };
  std::vector<Fixed64> coords(n);
  for (std::size_t attempt = 0; attempt <= kMaxRetries; ++attempt) {
    double x = gauss ? std::exp2(rng.uniform01()) - 1.0 : rng.uniform01();
    bool hit = x == 0.0;
    for (std::size_t t = 0; t < burn_in && !hit; ++t) {
      x = step(x);
      hit = x == 0.0;
    }
    for (std::size_t i = 0; i < n && !hit; ++i) {
      coords[i] = real_to_fixed(x);
      if (i + 1 < n) {
        x = step(x);
        hit = x == 0.0;
      }
    }
    if (!hit) return OrbitCloud(1, cfg.metric, std::move(coords), origin);
    ++origin.retries;
    std::clog << "orbitmatch: " << origin.map << " orbit reached the discontinuity at 0; resampling x0\n";
  }
  throw NumericDegeneracy("orbit of " + origin.map + " kept hitting the discontinuity at 0");
}

OrbitCloud iid_uniform_cloud(std::size_t dim, std::size_t n, Metric metric, Rng& rng) {
  if (dim == 0 || n == 0) throw InvalidArgument("iid_uniform_cloud needs dim, n >= 1");
  std::vector<Fixed64> coords(n * dim);
  for (auto& c : coords) c = rng.next();
  return OrbitCloud(dim, metric, std::move(coords), OrbitOrigin{"uniform(d=" + std::to_string(dim) + ")", rng.seed(), false, 0});
}

std::pair<double, double> parry_density_bounds(double beta) {
  if (!(beta > 1.0)) throw InvalidArgument("parry_density_bounds needs beta > 1");
  const double lo = 1.0 - 1.0 / beta;
  return {lo, 1.0 / lo};
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw IoError("orbit cloud: truncated input");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

std::uint32_t metric_tag(Metric m) {
  switch (m) {
    case Metric::TorusMax: return 0;
    case Metric::TorusEuclid: return 1;
    case Metric::Symbolic: return 2;
  }
  return 0;
}

}  // namespace

void write_orbit_cloud(std::ostream& out, const OrbitCloud& cloud) {
  out.write("ORBC", 4);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cloud.dim()));
  put_le<std::uint64_t>(out, cloud.size());
  put_le<std::uint32_t>(out, metric_tag(cloud.metric()));
  put_le<std::uint64_t>(out, cloud.origin().seed);
  const auto& desc = cloud.origin().map;
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(desc.size()));
  out.write(desc.data(), static_cast<std::streamsize>(desc.size()));
  for (auto w : cloud.coords()) put_le<std::uint64_t>(out, w);
  if (!out) throw IoError("orbit cloud: write failed");
}

OrbitCloud read_orbit_cloud(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "ORBC") throw IoError("orbit cloud: bad magic");
  if (get_le<std::uint32_t>(in) != 1) throw IoError("orbit cloud: unsupported version");
  const auto dim = get_le<std::uint32_t>(in);
  const auto n = get_le<std::uint64_t>(in);
  const auto tag = get_le<std::uint32_t>(in);
  if (tag > 1) throw IoError("orbit cloud: bad metric tag");
  OrbitOrigin origin;
  origin.seed = get_le<std::uint64_t>(in);
  const auto len = get_le<std::uint32_t>(in);
  origin.map.resize(len);
  in.read(origin.map.data(), len);
  if (!in) throw IoError("orbit cloud: truncated origin");
  origin.isometric = origin.map.rfind("rotation", 0) == 0;
  std::vector<Fixed64> coords(n * dim);
  for (auto& w : coords) w = get_le<std::uint64_t>(in);
  return OrbitCloud(dim, tag == 0 ? Metric::TorusMax : Metric::TorusEuclid, std::move(coords), std::move(origin));
}

void save_orbit_cloud(const std::string& path, const OrbitCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_orbit_cloud(out, cloud);
}

OrbitCloud load_orbit_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_orbit_cloud(in);
}

}  // namespace orbitmatch
