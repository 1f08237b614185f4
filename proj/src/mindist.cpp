#include "orbitmatch/mindist.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <set>
#include <string>

#include "orbitmatch/error.hpp"
#include "orbitmatch/matching.hpp"
#include "orbitmatch/spatial_index.hpp"

namespace orbitmatch {

namespace {

struct NaiveResult {
  DistKey key = kMaxDistKey;
  std::size_t i = 0, j = 0;
};

NaiveResult naive_scan(const OrbitCloud& x, const OrbitCloud& y, std::size_t n) {
  require_compatible(x, y);
  if (n == 0 || n > x.size() || n > y.size()) {
    throw InvalidArgument("n = " + std::to_string(n) + " outside [1, cloud size]");
  }
  NaiveResult best;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = x.point(i);
    for (std::size_t j = 0; j < n; ++j) {
      DistKey k = distance_key(p, y.point(j), x.metric());
      if (k < best.key) best = {k, i, j};
    }
    if (best.key.value == 0) break;
  }
  return best;
}

double exponent_of(double m, std::size_t n) {
  if (!(m > 0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(m) / -std::log(static_cast<double>(n));
}

// Nearest stored value on the circle, as a distance key.
DistKey circle_nearest(const std::set<Fixed64>& s, Fixed64 q, Metric metric) {
  if (s.empty()) return kMaxDistKey;
  auto hi = s.lower_bound(q);
  if (hi == s.end()) hi = s.begin();
  auto lo = hi == s.begin() ? std::prev(s.end()) : std::prev(hi);
  Fixed64 d = std::min(circle_norm(*hi - q), circle_norm(*lo - q));
  return axis_bound_key(d, metric);
}

// Streams both clouds in index order and calls record(step, best) after
// point `step` of each cloud has been inserted.
template <typename Record>
void running_minimum(const OrbitCloud& x, const OrbitCloud& y, std::size_t n_max, Record&& record) {
  const Metric metric = x.metric();
  DistKey best = kMaxDistKey;
  if (x.dim() == 1) {
    std::set<Fixed64> xs, ys;
    for (std::size_t i = 0; i < n_max; ++i) {
      const Fixed64 xi = x.point(i)[0];
      const Fixed64 yi = y.point(i)[0];
      if (best.value != 0) {
        xs.insert(xi);
        best = std::min(best, circle_nearest(ys, xi, metric));
        ys.insert(yi);
        best = std::min(best, circle_nearest(xs, yi, metric));
      }
      record(i, best);
    }
    return;
  }
  const unsigned bits = TorusGrid::bits_for(std::min<std::size_t>(n_max, 1024), x.dim());
  TorusGrid gx(x.dim(), metric, bits), gy(x.dim(), metric, bits);
  for (std::size_t i = 0; i < n_max; ++i) {
    if (best.value != 0) {
      auto xi = x.point(i);
      auto yi = y.point(i);
      if (auto k = gy.nearest_below(xi, best)) best = *k;
      gx.insert(xi, static_cast<std::uint32_t>(i));
      if (auto k = gx.nearest_below(yi, best)) best = *k;
      gy.insert(yi, static_cast<std::uint32_t>(i));
    }
    record(i, best);
  }
}

}  // namespace

MinDistProfile MinDistProfile::from_values(Schedule schedule, std::vector<double> m_values) {
  if (m_values.size() != schedule.size()) throw InvalidArgument("profile values do not match schedule");
  MinDistProfile p{std::move(schedule), Metric::TorusMax, {}, {}, {}, {}};
  p.m_values = std::move(m_values);
  p.keys.assign(p.m_values.size(), DistKey{});
  for (std::size_t s = 0; s < p.m_values.size(); ++s) {
    if (p.m_values[s] < 0) throw InvalidArgument("negative distance in profile");
    p.keys[s] = radius_to_key(p.m_values[s], p.metric);
    p.exact_zero.push_back(p.m_values[s] == 0);
    p.exponents.push_back(exponent_of(p.m_values[s], p.schedule[s]));
  }
  return p;
}

DistKey mindist_naive_key(const OrbitCloud& x, const OrbitCloud& y, std::size_t n) {
  return naive_scan(x, y, n).key;
}

double mindist_naive(const OrbitCloud& x, const OrbitCloud& y, std::size_t n) {
  return key_to_real(mindist_naive_key(x, y, n), x.metric());
}

MinDistProfile mindist_fast(const OrbitCloud& x, const OrbitCloud& y, const Schedule& schedule) {
  require_compatible(x, y);
  const std::size_t n_max = schedule.back();
  if (n_max > x.size() || n_max > y.size()) {
    throw InvalidArgument("schedule reaches n = " + std::to_string(n_max) + " beyond the cloud sizes");
  }
  if (n_max > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("cloud too large");
  MinDistProfile p{schedule, x.metric(), {}, {}, {}, {}};
  std::size_t s = 0;
  running_minimum(x, y, n_max, [&](std::size_t step, DistKey best) {
    while (s < schedule.size() && schedule[s] == step + 1) {
      const double m = key_to_real(best, p.metric);
      p.keys.push_back(best);
      p.m_values.push_back(m);
      p.exact_zero.push_back(best.value == 0);
      p.exponents.push_back(exponent_of(m, schedule[s]));
      ++s;
    }
  });
  return p;
}

std::optional<std::size_t> hitting_time(const OrbitCloud& x, std::span<const Fixed64> center, double r) {
  if (!(r > 0)) throw InvalidArgument("hitting_time needs r > 0");
  if (center.size() != x.dim()) throw DimensionMismatch("center dimension does not match cloud");
  const DistKey limit = radius_to_key(r, x.metric());
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (distance_key(x.point(k), center, x.metric()) < limit) return k;
  }
  return std::nullopt;
}

std::optional<std::size_t> hitting_time(const OrbitCloud& x, const TorusPoint& center, double r) {
  return hitting_time(x, std::span<const Fixed64>(center.coords), r);
}

DualityReport check_duality(const OrbitCloud& x, const OrbitCloud& y, std::size_t n, double r) {
  const NaiveResult best = naive_scan(x, y, n);
  DualityReport rep;
  rep.n = n;
  rep.r = r;
  rep.mindist = key_to_real(best.key, x.metric());
  rep.witness_i = best.i;
  rep.witness_j = best.j;
  rep.wait_forward = hitting_time(x, y.point(0), r);
  rep.wait_backward = hitting_time(y, x.point(0), r);

  const DistKey limit = radius_to_key(r, x.metric());
  auto within = [n](const std::optional<std::size_t>& w) { return w && *w <= n - 1; };
  rep.forward_applies = within(rep.wait_forward) || within(rep.wait_backward);
  if (rep.forward_applies) rep.forward_holds = best.key < limit;

  const bool isometric = x.origin().isometric && y.origin().isometric;
  const bool far_start = !(distance_key(x.point(0), y.point(0), x.metric()) < limit);
  rep.converse_applies = isometric && far_start && !within(rep.wait_forward) && !within(rep.wait_backward);
  if (rep.converse_applies) rep.converse_holds = !(best.key < limit);
  return rep;
}

std::size_t symbolic_neglog_mindist(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n) {
  if (x.alphabet_size() != y.alphabet_size()) throw AlphabetMismatch("sequences use different alphabets");
  if (n == 0 || n > x.size() || n > y.size()) throw InvalidArgument("n outside [1, sequence length]");
  auto xs = x.symbols();
  auto ys = y.symbols();
  // agree[j] holds the agreement length of x[i..] and y[j..] for the current i.
  std::vector<std::size_t> agree(ys.size() + 1, 0), next(ys.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = xs.size(); i-- > 0;) {
    for (std::size_t j = ys.size(); j-- > 0;) agree[j] = xs[i] == ys[j] ? next[j + 1] + 1 : 0;
    agree[ys.size()] = 0;
    if (i < n) {
      for (std::size_t j = 0; j < n; ++j) best = std::max(best, agree[j]);
    }
    std::swap(agree, next);
  }
  return best;
}

BridgeReport bridge_check(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n) {
  if (n == 0 || x.size() < 2 * n || y.size() < 2 * n) {
    throw InvalidArgument("bridge_check needs sequences of length >= 2n");
  }
  BridgeReport rep;
  rep.n = n;
  rep.neglog_min = symbolic_neglog_mindist(x, y, n);
  rep.m_n = lcs_fast(x, y, n);
  rep.m_2n = lcs_fast(x, y, 2 * n);
  rep.applies = rep.neglog_min <= n;
  if (rep.applies) {
    rep.holds = rep.m_n <= rep.neglog_min + 1 && rep.neglog_min <= rep.m_2n + 1;
    rep.holds_strict = rep.m_n <= rep.neglog_min && rep.neglog_min <= rep.m_2n;
  }
  return rep;
}

}  // namespace orbitmatch
