#pragma once

// Continued fractions of 128-bit fixed-point angles, angles with a designed
// irrationality exponent, and the exact shortest distance for rotations.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "orbitmatch/core.hpp"
#include "orbitmatch/rng.hpp"

namespace orbitmatch {

using BigInt = boost::multiprecision::cpp_int;

/// theta = [0; a_1, a_2, ...]. Index k runs from 0 with a_0 = 0,
/// p_0/q_0 = 0/1, so q holds 1, a_1, ... and q_1 = a_1.
struct ContinuedFraction {
  std::vector<BigInt> a;
  std::vector<BigInt> p;
  std::vector<BigInt> q;
  bool terminated = false;  // the expansion ended: theta equals p.back()/q.back()
  bool truncated = false;   // stopped early (k_max reached or q_k^2 > 2^128)

  std::size_t levels() const noexcept { return a.empty() ? 0 : a.size() - 1; }
};

/// Expansion of theta / 2^128, keeping levels with q_k^2 <= 2^128.
ContinuedFraction cf_expand(Fixed128 theta, std::size_t k_max);

/// Convergents of [0; a_1, ..., a_k] from the partial quotients.
ContinuedFraction cf_from_quotients(const std::vector<BigInt>& a);

/// floor(num * 2^128 / den) mod 2^128.
Fixed128 fixed128_from_rational(const BigInt& num, const BigInt& den);

/// floor(2^128 (sqrt(5) - 1) / 2) and floor(2^128 (sqrt(2) - 1)).
Fixed128 golden_theta();
Fixed128 sqrt2_theta();

/// "0x" followed by exactly 32 hex digits.
std::string format_theta_hex(Fixed128 theta);
Fixed128 parse_theta_hex(std::string_view text);

struct DesignedTheta {
  Fixed128 theta = 0;
  double eta_target = 1;
  ContinuedFraction cf;  // the constructed (finite) expansion
};

/// Quotients a_{k+1} = max(1, floor(q_k^(eta-1))) so that q_{k+1} ~ q_k^eta,
/// stopping before q exceeds 2^60 or after k_max levels. Throws
/// InvalidArgument when fewer than 4 levels fit.
DesignedTheta design_theta(double eta_target, std::size_t k_max);

struct EtaEstimate {
  double eta = 1;
  std::vector<std::size_t> level;  // k with q_k > 1
  std::vector<double> per_k;       // log q_{k+1} / log q_k
  std::vector<double> running_max;
  std::size_t k_used = 0;          // levels entering the final maximum
};

/// Maximum of log q_{k+1} / log q_k over the last half of the levels.
EtaEstimate eta_estimate(const ContinuedFraction& cf);

struct QkBoundCheck {
  std::size_t level = 0;
  Fixed128 norm = 0;       // ||q_k theta|| in units of 2^-128
  bool lower_ok = true;    // 1/(2 q_{k+1}) < ||q_k theta||
  bool upper_ok = true;    // ||q_k theta|| <= 1/q_{k+1}
  bool approx_ok = true;   // |theta - p_k/q_k| < 1/(q_k q_{k+1})
};

/// Exact checks of the convergent bounds for k >= 1 on the fixed-point theta.
std::vector<QkBoundCheck> check_qk_bounds(Fixed128 theta, const ContinuedFraction& cf);

/// min over |j| <= n-1 of ||delta + j theta||, in units of 2^-128.
Fixed128 rotation_mindist_key(Fixed128 theta, Fixed128 delta, std::size_t n);
double rotation_mindist_exact(Fixed128 theta, Fixed128 delta, std::size_t n);

struct RotationOptions {
  std::size_t n_lo = 1000;  // smallest n considered by either probe
  double ratio = 2.0;       // geometric schedule ratio
  unsigned workers = 1;
};

struct RotationTrial {
  Fixed128 delta = 0;
  bool excluded = false;                 // delta = 0, exponent undefined
  std::vector<double> geometric_exponents;
  std::vector<double> probe_exponents;
  double max_geometric = 0;              // limsup estimate
  double min_probe = 0;                  // liminf estimate along the probes
  double min_all = 0;                    // min exponent over every n in [n_lo, n_max]
  std::size_t argmin_all = 0;
};

struct RotationScalingReport {
  Fixed128 theta = 0;
  std::size_t n_max = 0;
  ContinuedFraction cf;
  double eta_estimate = 1;
  Schedule geometric{std::vector<std::size_t>{2, 3}};
  std::vector<std::size_t> probes;       // q_k and floor(q_{k+1}/4) inside [n_lo, n_max]
  std::vector<RotationTrial> trials;
  double median_max_geometric = 0;
  double median_min_probe = 0;
  double median_min_all = 0;
  std::size_t excluded = 0;
};

/// Per trial t, delta drawn from rng.split(t), and the series log m_n / (-log n) along a
/// geometric schedule and along the convergent probes.
RotationScalingReport rotation_scaling(Fixed128 theta, std::size_t n_max, std::size_t trials, Rng& rng,
                                       const RotationOptions& options = {});

}  // namespace orbitmatch
