#pragma once

// Independent reference computations for the test suites. Nothing here
// calls into the library's algorithms; only plain data types are shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using u128 = unsigned __int128;
using boost::multiprecision::cpp_int;

// Longest common substring by direct comparison of every start pair.
inline std::size_t lcs_brute(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y,
                             std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t k = 0;
      while (i + k < n && j + k < n && x[i + k] == y[j + k]) ++k;
      best = std::max(best, k);
    }
  }
  return best;
}

// Circle distance of two 2^-64 fixed-point numerators, as an exact
// rational (numerator over 2^64) computed with signed 128-bit arithmetic.
inline u128 circle_num(std::uint64_t a, std::uint64_t b) {
  __int128 d = static_cast<__int128>(a) - static_cast<__int128>(b);
  if (d < 0) d = -d;
  const __int128 one = static_cast<__int128>(1) << 64;
  return static_cast<u128>(std::min(d, one - d));
}

// max-metric numerator (over 2^64) or squared Euclidean numerator (over 2^128)
inline cpp_int dist_num(const std::uint64_t* p, const std::uint64_t* q, std::size_t dim, bool euclid) {
  cpp_int acc = 0;
  for (std::size_t c = 0; c < dim; ++c) {
    const cpp_int v = static_cast<std::uint64_t>(circle_num(p[c], q[c]));  // <= 2^63
    if (euclid) acc += v * v;
    else acc = std::max(acc, v);
  }
  return acc;
}

inline double dist_real(const std::uint64_t* p, const std::uint64_t* q, std::size_t dim, bool euclid) {
  const cpp_int v = dist_num(p, q, dim, euclid);
  return euclid ? std::sqrt(std::ldexp(v.convert_to<double>(), -128)) : std::ldexp(v.convert_to<double>(), -64);
}

// Exact "distance < r" with r a double: compare numerators against r * 2^64
// (or r^2 * 2^128) as big rationals.
inline bool dist_below(const std::uint64_t* p, const std::uint64_t* q, std::size_t dim, bool euclid, double r) {
  int exp = 0;
  const double mant = std::frexp(r, &exp);           // r = mant * 2^exp
  const auto m = static_cast<std::uint64_t>(std::ldexp(mant, 53));  // r = m * 2^(exp-53)
  const cpp_int v = dist_num(p, q, dim, euclid);
  if (!euclid) {
    // v / 2^64 < m * 2^(exp-53)  <=>  v * 2^53 < m * 2^(exp+64)
    const int shift = exp + 64;
    if (shift >= 0) return (v << 53) < (cpp_int(m) << shift);
    return (v << (53 - shift)) < cpp_int(m);
  }
  // v / 2^128 < m^2 * 2^(2 exp - 106)
  const int shift = 2 * exp + 128;
  const cpp_int m2 = cpp_int(m) * m;
  if (shift >= 0) return (v << 106) < (m2 << shift);
  return (v << (106 - shift)) < m2;
}

// H2 of a 2x2 chain: -log of the Perron root of the entrywise square, in
// closed form from the trace and determinant.
inline double h2_markov_2x2(double a, double b, double c, double d) {
  const double A = a * a, B = b * b, C = c * c, D = d * d;
  const double tr = A + D, det = A * D - B * C;
  return -std::log(0.5 * (tr + std::sqrt(tr * tr - 4 * det)));
}

// Collision estimator by explicit block strings.
inline double collision_h2(const std::vector<std::uint32_t>& s, std::size_t k, double* plugin = nullptr) {
  std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
  const std::size_t m = s.size() - k + 1;
  for (std::size_t i = 0; i < m; ++i) counts[std::vector<std::uint32_t>(s.begin() + i, s.begin() + i + k)]++;
  long double pairs = 0, sq = 0;
  for (const auto& [block, c] : counts) {
    pairs += static_cast<long double>(c) * (c - 1);
    sq += static_cast<long double>(c) * c;
  }
  const long double md = m;
  if (plugin) *plugin = static_cast<double>(-std::log(sq / (md * md)) / k);
  return static_cast<double>(-std::log(pairs / (md * (md - 1))) / k);
}

// Parry density of x -> beta x mod 1, normalised, and its CDF.
inline double parry_cdf(double beta, double x, int terms = 200) {
  // h(t) = sum_{n>=0, t < T^n(1)} beta^-n; T^n(1) is the orbit of 1.
  std::vector<double> orbit;
  double t = 1.0;
  for (int n = 0; n < terms; ++n) {
    orbit.push_back(t);
    t = beta * t - std::floor(beta * t);
  }
  auto integral = [&](double u) {
    double s = 0;
    for (int n = 0; n < terms; ++n) s += std::pow(beta, -n) * std::min(u, orbit[n]);
    return s;
  };
  return integral(x) / integral(1.0);
}

// Convergent denominators from partial quotients.
inline std::vector<cpp_int> denominators(const std::vector<cpp_int>& a) {
  std::vector<cpp_int> q{1};
  cpp_int prev = 0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    cpp_int next = a[k] * q.back() + prev;
    prev = q.back();
    q.push_back(next);
  }
  return q;
}

// Fibonacci F_1 .. F_count (1, 1, 2, 3, ...).
inline std::vector<cpp_int> fibonacci(std::size_t count) {
  std::vector<cpp_int> f{1, 1};
  while (f.size() < count) f.push_back(f[f.size() - 1] + f[f.size() - 2]);
  f.resize(count);
  return f;
}

// Brute force ||delta + j theta|| over |j| < n on 128-bit numerators.
inline u128 rotation_min_brute(u128 theta, u128 delta, std::size_t n) {
  u128 best = ~u128{0};
  for (std::size_t j = 0; j < n; ++j) {
    for (int sign : {1, -1}) {
      const u128 v = sign > 0 ? delta + theta * j : delta - theta * j;
      best = std::min(best, std::min<u128>(v, u128{0} - v));
    }
  }
  return best;
}

}  // namespace oracle
