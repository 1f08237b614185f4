#include "doctest.h"

#include <cmath>
#include <random>

#include "orbitmatch/core.hpp"
#include "orbitmatch/error.hpp"
#include "orbitmatch/fit.hpp"
#include "orbitmatch/parallel.hpp"
#include "orbitmatch/rng.hpp"
#include "oracles.hpp"

using namespace orbitmatch;

namespace {

TorusPoint random_point(Rng& rng, std::size_t d) {
  TorusPoint p;
  for (std::size_t c = 0; c < d; ++c) p.coords.push_back(rng.next());
  return p;
}

}  // namespace

TEST_CASE("fixed point conversions") {
  CHECK(real_to_fixed(0.25) == Fixed64{1} << 62);
  CHECK(real_to_fixed(1.25) == Fixed64{1} << 62);
  CHECK(real_to_fixed(-0.25) == Fixed64{3} << 62);
  CHECK(fixed_to_real(Fixed64{1} << 63) == 0.5);
  CHECK(circle_norm(Fixed64{0} - 5) == 5);
  CHECK(fixed128_to_real(Fixed128{1} << 126) == 0.25);
}

TEST_CASE("symbolic distance") {
  auto a = SymbolicSequence::from_string("010", "01");
  auto b = SymbolicSequence::from_string("011", "01");
  CHECK(symbolic_distance(a, b).k == 2);
  CHECK(symbolic_distance(a, b).value == doctest::Approx(std::exp(-2.0)));
  auto c = SymbolicSequence::from_string("0101", "01");
  CHECK(symbolic_distance(c, c).k == 4);
  CHECK(symbolic_distance(c, c).value == doctest::Approx(std::exp(-4.0)));

  SUBCASE("random pairs against a character scan") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
      std::vector<std::uint32_t> x(12), y(12);
      for (auto& v : x) v = static_cast<std::uint32_t>(rng.uniform_below(3));
      for (auto& v : y) v = static_cast<std::uint32_t>(rng.uniform_below(3));
      std::size_t k = 0;
      while (k < 12 && x[k] == y[k]) ++k;
      SymbolicSequence sx(3, x), sy(3, y);
      CHECK(symbolic_distance(sx, sy).k == k);
      CHECK(symbolic_distance(sy, sx).k == k);
    }
  }

  SUBCASE("ultrametric triangle inequality") {
    Rng rng(8);
    for (int t = 0; t < 1000; ++t) {
      std::vector<std::uint32_t> v[3];
      for (auto& s : v) {
        s.resize(8);
        for (auto& c : s) c = static_cast<std::uint32_t>(rng.uniform_below(2));
      }
      SymbolicSequence a(2, v[0]), b(2, v[1]), c(2, v[2]);
      CHECK(symbolic_distance(a, c).value <= symbolic_distance(a, b).value + symbolic_distance(b, c).value + 1e-15);
    }
  }

  CHECK_THROWS_AS(symbolic_distance(SymbolicSequence(2, {0}), SymbolicSequence(3, {0})), AlphabetMismatch);
  CHECK_THROWS_AS(SymbolicSequence(2, {0, 2}), InvalidArgument);
}

TEST_CASE("torus distance") {
  TorusPoint p{{real_to_fixed(0.1)}}, q{{real_to_fixed(0.9)}};
  CHECK(torus_distance(p, q, Metric::TorusMax) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(torus_distance(p, p, Metric::TorusMax) == 0);
  CHECK_THROWS_AS(torus_distance(p, TorusPoint{{0, 0}}, Metric::TorusMax), DimensionMismatch);
  CHECK_THROWS_AS(torus_distance(p, q, Metric::Symbolic), MetricMismatch);
  TorusPoint p4{{1, 2, 3, 4}};
  CHECK_THROWS_AS(torus_distance(p4, p4, Metric::TorusEuclid), DimensionMismatch);

  SUBCASE("random pairs against the rational oracle") {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
      auto a = random_point(rng, 2), b = random_point(rng, 2);
      for (bool euclid : {false, true}) {
        const Metric m = euclid ? Metric::TorusEuclid : Metric::TorusMax;
        const double expected = oracle::dist_real(a.coords.data(), b.coords.data(), 2, euclid);
        // correctly rounded up to a few ulps (sqrt adds one)
        CHECK(std::abs(torus_distance(a, b, m) - expected) <= 4 * std::ldexp(expected, -53));
        CHECK(distance_key(a.coords, b.coords, m).value ==
              oracle::dist_num(a.coords.data(), b.coords.data(), 2, euclid));
      }
    }
  }

  SUBCASE("symmetry and triangle inequality") {
    Rng rng(12);
    for (int t = 0; t < 1000; ++t) {
      const std::size_t d = 1 + t % 3;
      auto a = random_point(rng, d), b = random_point(rng, d), c = random_point(rng, d);
      for (Metric m : {Metric::TorusMax, Metric::TorusEuclid}) {
        CHECK(torus_distance(a, b, m) == torus_distance(b, a, m));
        CHECK(torus_distance(a, c, m) <= torus_distance(a, b, m) + torus_distance(b, c, m) + 1e-15);
      }
    }
  }
}

TEST_CASE("radius keys are exact thresholds") {
  Rng rng(13);
  for (int t = 0; t < 3000; ++t) {
    const std::size_t d = 1 + t % 3;
    auto a = random_point(rng, d);
    auto b = a;
    // pull b close to a so that small radii are exercised
    for (auto& c : b.coords) c += rng.next() >> (rng.uniform_below(60));
    for (bool euclid : {false, true}) {
      const Metric m = euclid ? Metric::TorusEuclid : Metric::TorusMax;
      const double actual = torus_distance(a, b, m);
      for (double r : {actual, std::nextafter(actual, 1.0), std::nextafter(actual, 0.0), actual * 1.5, 0.3}) {
        if (!(r > 0)) continue;
        const bool below = distance_key(a.coords, b.coords, m) < radius_to_key(r, m);
        CHECK(below == oracle::dist_below(a.coords.data(), b.coords.data(), d, euclid, r));
      }
    }
  }
}

TEST_CASE("geometric schedule") {
  auto s = geometric_schedule(4, 32, 2.0);
  CHECK(std::vector<std::size_t>(s.values().begin(), s.values().end()) == std::vector<std::size_t>{4, 8, 16, 32});
  auto t = geometric_schedule(10, 100000, 2.0);
  CHECK(t.size() == 14);
  CHECK(t.front() == 10);
  CHECK(t.back() == 100000);
  // 10 * 2^j up to 40960, then the endpoint
  for (std::size_t j = 0; j + 1 < t.size(); ++j) CHECK(t[j] == (std::size_t{10} << j));
  auto u = geometric_schedule(2, 3, 10.0);
  CHECK(u.size() == 2);
  CHECK(u[0] == 2);
  CHECK(u[1] == 3);
  CHECK_THROWS_AS(geometric_schedule(1, 10, 2.0), InvalidArgument);
  CHECK_THROWS_AS(geometric_schedule(10, 5, 2.0), InvalidArgument);
  CHECK_THROWS_AS(geometric_schedule(2, 10, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Schedule({4, 4}), InvalidArgument);

  SUBCASE("strictly increasing for random parameters") {
    Rng rng(14);
    for (int i = 0; i < 500; ++i) {
      const std::size_t lo = 2 + rng.uniform_below(100);
      const std::size_t hi = lo + rng.uniform_below(100000);
      const double ratio = 1.01 + 3 * rng.uniform01();
      auto v = geometric_schedule(lo, hi, ratio);
      CHECK(v.front() == lo);
      CHECK(v.back() == hi);
      for (std::size_t j = 1; j < v.size(); ++j) CHECK(v[j] > v[j - 1]);
    }
  }
}

TEST_CASE("rng golden prefix") {
  // reference values from an independent implementation of SplitMix64 seeding + xoshiro256**
  const std::uint64_t golden[16] = {
      0x15780b2e0c2ec716, 0x6104d9866d113a7e, 0xae17533239e499a1, 0xecb8ad4703b360a1,
      0xfde6dc7fe2ec5e64, 0xc50da53101795238, 0xb82154855a65ddb2, 0xd99a2743ebe60087,
      0xc2e96e726e97647e, 0x9556615f775fbc3d, 0xaeb53b340c103971, 0x4a69db9873af8965,
      0xcd0feda93006c6b6, 0x52480865a4b42742, 0xb60dec3bf2d887cd, 0xe0b55a68b96677fa};
  Rng rng(42);
  for (auto g : golden) CHECK(rng.next() == g);
  CHECK(Rng(0).next() == 0x99ec5f36cb75f2b4);
  CHECK(Rng::stream_seed(42, 0) == 0xbdd732262feb6e95);
  CHECK(Rng::stream_seed(42, 3) == 0x581ce1ff0e4ae394);
  CHECK(Rng(42).split(1).seed() == Rng::stream_seed(42, 1));
}

TEST_CASE("rng ranges") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.uniform_below(7) < 7);
  }
  // std::uniform_int_distribution accepts it as a URBG
  std::uniform_int_distribution<int> dist(0, 5);
  CHECK(dist(rng) <= 5);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 37) throw InvalidArgument("boom");
                               }),
                  InvalidArgument);
}

TEST_CASE("line fit") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(-2.5 * v + 7);
  auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(7).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  CHECK(f.n_points == 5);
  std::vector<double> two{1, 2};
  CHECK_THROWS_AS(fit_line(two, two), FitError);
  std::vector<double> flat{3, 3, 3}, any{1, 2, 3};
  CHECK_THROWS_AS(fit_line(flat, any), FitError);
  auto idx = upper_half(x);
  CHECK(idx == std::vector<std::size_t>{2, 3, 4});
}
