#include "orbitmatch/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orbitmatch/error.hpp"
#include "orbitmatch/parallel.hpp"

namespace orbitmatch {

namespace {

const BigInt& two_pow_128() {
  static const BigInt v = BigInt(1) << 128;
  return v;
}

BigInt to_big(Fixed128 v) {
  BigInt b = static_cast<std::uint64_t>(v >> 64);
  b <<= 64;
  b += static_cast<std::uint64_t>(v);
  return b;
}

Fixed128 from_big(const BigInt& v) {
  const BigInt low_mask = (BigInt(1) << 64) - 1;
  auto lo = static_cast<std::uint64_t>(v & low_mask);
  auto hi = static_cast<std::uint64_t>((v >> 64) & low_mask);
  return (Fixed128{hi} << 64) | lo;
}

void push_level(ContinuedFraction& cf, const BigInt& a) {
  const std::size_t k = cf.a.size();
  cf.a.push_back(a);
  if (k == 0) {
    cf.p.push_back(a);
    cf.q.push_back(1);
    return;
  }
  const BigInt p_prev2 = k >= 2 ? cf.p[k - 2] : BigInt(1);
  const BigInt q_prev2 = k >= 2 ? cf.q[k - 2] : BigInt(0);
  cf.p.push_back(a * cf.p[k - 1] + p_prev2);
  cf.q.push_back(a * cf.q[k - 1] + q_prev2);
}

double log_big(const BigInt& v) {
  const std::size_t bits = boost::multiprecision::msb(v) + 1;
  if (bits <= 60) return std::log(static_cast<double>(static_cast<std::uint64_t>(v)));
  const std::size_t shift = bits - 60;
  return std::log(static_cast<double>(static_cast<std::uint64_t>(v >> shift))) +
         static_cast<double>(shift) * std::log(2.0);
}

double exponent_128(Fixed128 key, std::size_t n) {
  if (key == 0) return std::numeric_limits<double>::quiet_NaN();
  return std::log(fixed128_to_real(key)) / -std::log(static_cast<double>(n));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

ContinuedFraction cf_expand(Fixed128 theta, std::size_t k_max) {
  if (theta == 0) throw InvalidArgument("cf_expand: theta must be nonzero");
  if (k_max == 0) throw InvalidArgument("cf_expand: k_max must be >= 1");
  ContinuedFraction cf;
  push_level(cf, 0);
  BigInt num = to_big(theta);
  BigInt den = two_pow_128();
  for (;;) {
    BigInt a = den / num;
    BigInt rem = den % num;
    const std::size_t k = cf.a.size();
    const BigInt q_next = a * cf.q[k - 1] + (k >= 2 ? cf.q[k - 2] : BigInt(0));
    if (q_next * q_next > two_pow_128() || cf.levels() == k_max) {
      cf.truncated = true;
      break;
    }
    push_level(cf, a);
    if (rem == 0) {
      cf.terminated = true;
      break;
    }
    den = num;
    num = rem;
  }
  return cf;
}

ContinuedFraction cf_from_quotients(const std::vector<BigInt>& a) {
  ContinuedFraction cf;
  push_level(cf, 0);
  for (const auto& v : a) {
    if (v <= 0) throw InvalidArgument("partial quotients must be positive");
    push_level(cf, v);
  }
  cf.terminated = true;
  return cf;
}

Fixed128 fixed128_from_rational(const BigInt& num, const BigInt& den) {
  if (den <= 0) throw InvalidArgument("denominator must be positive");
  BigInt v = (num << 128) / den;
  v %= two_pow_128();
  if (v < 0) v += two_pow_128();
  return from_big(v);
}

Fixed128 golden_theta() {
  // 2^128 (sqrt 5 - 1) / 2 = (sqrt(5 * 2^256) - 2^128) / 2
  const BigInt root = boost::multiprecision::sqrt(BigInt(5) << 256);
  return from_big((root - two_pow_128()) >> 1);
}

Fixed128 sqrt2_theta() {
  const BigInt root = boost::multiprecision::sqrt(BigInt(2) << 256);
  return from_big(root - two_pow_128());
}

std::string format_theta_hex(Fixed128 theta) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out = "0x";
  for (int shift = 124; shift >= 0; shift -= 4) out += digits[static_cast<unsigned>(theta >> shift) & 0xf];
  return out;
}

Fixed128 parse_theta_hex(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  if (text.size() != 32) throw InvalidArgument("theta hex needs exactly 32 digits");
  Fixed128 v = 0;
  for (char c : text) {
    unsigned d;
    if (c >= '0' && c <= '9') d = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') d = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') d = static_cast<unsigned>(c - 'A' + 10);
    else throw InvalidArgument("invalid hex digit in theta");
    v = (v << 4) | d;
  }
  return v;
}

DesignedTheta design_theta(double eta_target, std::size_t k_max) {
  if (!(eta_target >= 1.0) || !std::isfinite(eta_target)) throw InvalidArgument("eta_target must be >= 1");
  const BigInt cap = BigInt(1) << 60;
  std::vector<BigInt> quotients;
  BigInt q_prev = 0, q = 1;  // q_{k-1}, q_k
  while (quotients.size() < k_max) {
    const double target = std::floor(std::pow(static_cast<double>(q), eta_target - 1.0));
    if (!(target < 0x1p60)) break;
    BigInt a = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(target));
    BigInt q_next = a * q + q_prev;
    if (q_next > cap) break;
    quotients.push_back(a);
    q_prev = q;
    q = q_next;
  }
  if (quotients.size() < 4) {
    throw InvalidArgument("eta_target " + std::to_string(eta_target) + " leaves only " +
                          std::to_string(quotients.size()) + " levels below 2^60");
  }
  DesignedTheta out;
  out.eta_target = eta_target;
  out.cf = cf_from_quotients(quotients);
  out.theta = fixed128_from_rational(out.cf.p.back(), out.cf.q.back());
  return out;
}

EtaEstimate eta_estimate(const ContinuedFraction& cf) {
  if (cf.q.size() < 3) throw InvalidArgument("eta_estimate needs >= 3 convergents");
  EtaEstimate est;
  double running = 1.0;
  for (std::size_t k = 0; k + 1 < cf.q.size(); ++k) {
    if (cf.q[k] <= 1) continue;
    const double ratio = log_big(cf.q[k + 1]) / log_big(cf.q[k]);
    running = std::max(running, ratio);
    est.level.push_back(k);
    est.per_k.push_back(ratio);
    est.running_max.push_back(running);
  }
  const std::size_t m = est.per_k.size();
  const std::size_t from = m / 2;
  est.k_used = m - from;
  for (std::size_t i = from; i < m; ++i) est.eta = std::max(est.eta, est.per_k[i]);
  return est;
}

std::vector<QkBoundCheck> check_qk_bounds(Fixed128 theta, const ContinuedFraction& cf) {
  std::vector<QkBoundCheck> out;
  const BigInt t = to_big(theta);
  // A finished expansion meets the upper bounds with equality at its last level.
  const std::size_t end = cf.terminated ? cf.q.size() - 1 : cf.q.size();
  for (std::size_t k = 1; k + 1 < end; ++k) {
    const BigInt& qk = cf.q[k];
    const BigInt& qn = cf.q[k + 1];
    QkBoundCheck c;
    c.level = k;
    // ||q_k theta|| on the 2^-128 grid: q_k * theta mod 2^128, folded.
    BigInt prod = (qk * t) % two_pow_128();
    BigInt norm = std::min(prod, BigInt(two_pow_128() - prod));
    c.norm = from_big(norm);
    c.lower_ok = two_pow_128() < 2 * qn * norm;
    c.upper_ok = qn * norm <= two_pow_128();
    // |t/2^128 - p/q| < 1/(q q_next)  <=>  |t q - p 2^128| q_next < 2^128
    BigInt diff = t * qk - cf.p[k] * two_pow_128();
    if (diff < 0) diff = -diff;
    c.approx_ok = diff * qn < two_pow_128();
    out.push_back(c);
  }
  return out;
}

Fixed128 rotation_mindist_key(Fixed128 theta, Fixed128 delta, std::size_t n) {
  if (n == 0) throw InvalidArgument("rotation_mindist needs n >= 1");
  Fixed128 best = circle_norm128(delta);
  Fixed128 up = delta, down = delta;
  for (std::size_t j = 1; j < n && best != 0; ++j) {
    up += theta;
    down -= theta;
    best = std::min({best, circle_norm128(up), circle_norm128(down)});
  }
  return best;
}

double rotation_mindist_exact(Fixed128 theta, Fixed128 delta, std::size_t n) {
  return fixed128_to_real(rotation_mindist_key(theta, delta, n));
}

RotationScalingReport rotation_scaling(Fixed128 theta, std::size_t n_max, std::size_t trials, Rng& rng,
                                       const RotationOptions& options) {
  if (theta == 0) throw InvalidArgument("rotation_scaling: theta must be nonzero");
  if (trials == 0) throw InvalidArgument("rotation_scaling needs trials >= 1");
  if (n_max < 1000 || options.n_lo < 2 || options.n_lo >= n_max) {
    throw InvalidArgument("rotation_scaling needs n_max >= 1000 and 2 <= n_lo < n_max");
  }
  RotationScalingReport rep;
  rep.theta = theta;
  rep.n_max = n_max;
  rep.cf = cf_expand(theta, 256);
  if (rep.cf.q.size() >= 3) rep.eta_estimate = eta_estimate(rep.cf).eta;
  rep.geometric = geometric_schedule(options.n_lo, n_max, options.ratio);

  const BigInt lo = options.n_lo, hi = n_max;
  for (std::size_t k = 0; k < rep.cf.q.size(); ++k) {
    for (const BigInt& v : {BigInt(rep.cf.q[k]), BigInt(rep.cf.q[k] / 4)}) {
      if (v >= lo && v <= hi) rep.probes.push_back(static_cast<std::size_t>(v));
    }
  }
  std::sort(rep.probes.begin(), rep.probes.end());
  rep.probes.erase(std::unique(rep.probes.begin(), rep.probes.end()), rep.probes.end());

  rep.trials.resize(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng trial = rng.split(t);
    const Fixed128 hi_word = trial.next();
    rep.trials[t].delta = (hi_word << 64) | trial.next();
  }

  const auto geo = rep.geometric.values();
  parallel_for(trials, options.workers, [&](std::size_t index) {
    RotationTrial& t = rep.trials[index];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.max_geometric = t.min_probe = t.min_all = nan;
    if (t.delta == 0) {
      t.excluded = true;
      return;
    }
    // m_n = min(m_{n-1}, ||delta + (n-1) theta||, ||delta - (n-1) theta||)
    Fixed128 best = circle_norm128(t.delta);
    Fixed128 up = t.delta, down = t.delta;
    std::size_t g = 0, pr = 0;
    double min_all = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= n_max; ++n) {
      if (n > 1) {
        up += theta;
        down -= theta;
        best = std::min({best, circle_norm128(up), circle_norm128(down)});
      }
      if (n < options.n_lo) continue;
      if (best == 0) {
        t.excluded = true;
        return;
      }
      const double e = exponent_128(best, n);
      if (e < min_all) {
        min_all = e;
        t.argmin_all = n;
      }
      if (g < geo.size() && geo[g] == n) {
        t.geometric_exponents.push_back(e);
        ++g;
      }
      if (pr < rep.probes.size() && rep.probes[pr] == n) {
        t.probe_exponents.push_back(e);
        ++pr;
      }
    }
    t.min_all = min_all;
    t.max_geometric = *std::max_element(t.geometric_exponents.begin(), t.geometric_exponents.end());
    if (!t.probe_exponents.empty()) {
      t.min_probe = *std::min_element(t.probe_exponents.begin(), t.probe_exponents.end());
    }
  });

  std::vector<double> maxes, mins, mins_all;
  for (const auto& t : rep.trials) {
    if (t.excluded) {
      ++rep.excluded;
      continue;
    }
    maxes.push_back(t.max_geometric);
    if (!std::isnan(t.min_probe)) mins.push_back(t.min_probe);
    mins_all.push_back(t.min_all);
  }
  rep.median_max_geometric = median_of(maxes);
  rep.median_min_probe = median_of(mins);
  rep.median_min_all = median_of(mins_all);
  return rep;
}

}  // namespace orbitmatch
