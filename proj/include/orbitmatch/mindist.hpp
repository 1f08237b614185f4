#pragma once

// Shortest distance m_n between two orbits, hitting times, and the checks
// tying m_n to hitting times and to the longest common substring.

#include <cstddef>
#include <optional>
#include <vector>

#include "orbitmatch/core.hpp"

namespace orbitmatch {

class SymbolicSequence;

struct MinDistProfile {
  Schedule schedule;
  Metric metric = Metric::TorusMax;
  std::vector<double> m_values;     // m_n aligned with the schedule
  std::vector<DistKey> keys;        // exact fixed-point minima
  std::vector<bool> exact_zero;     // the clouds share a point by step n
  std::vector<double> exponents;    // log m_n / (-log n); NaN when flagged

  /// Profile from externally computed values (synthetic laws, tests).
  static MinDistProfile from_values(Schedule schedule, std::vector<double> m_values);
};

/// Exact minimum over all n^2 pairs (i, j < n).
DistKey mindist_naive_key(const OrbitCloud& x, const OrbitCloud& y, std::size_t n);
double mindist_naive(const OrbitCloud& x, const OrbitCloud& y, std::size_t n);

/// Running minimum over growing prefixes. Points are inserted in index
/// order; each new point of X queries Y's index and vice versa. d = 1 uses
/// an ordered set with circular neighbours, d >= 2 a uniform torus grid.
MinDistProfile mindist_fast(const OrbitCloud& x, const OrbitCloud& y, const Schedule& schedule);

/// Smallest k >= 1 with d(point_k, center) < r; nullopt when no point of
/// the cloud enters the ball.
std::optional<std::size_t> hitting_time(const OrbitCloud& x, std::span<const Fixed64> center, double r);
std::optional<std::size_t> hitting_time(const OrbitCloud& x, const TorusPoint& center, double r);

struct DualityReport {
  std::size_t n = 0;
  double r = 0;
  double mindist = 0;
  std::size_t witness_i = 0, witness_j = 0;     // a minimizing pair
  std::optional<std::size_t> wait_forward;      // X entering B(y0, r)
  std::optional<std::size_t> wait_backward;     // Y entering B(x0, r)
  bool forward_applies = false;                 // some wait <= n - 1
  bool forward_holds = true;                    //   => m_n < r
  bool converse_applies = false;                // isometric, both waits > n - 1, d(x0,y0) >= r
  bool converse_holds = true;                   //   => m_n >= r
  bool passed() const { return forward_holds && converse_holds; }
};

/// Hitting-time duality on one instance. A hit within the first n iterates
/// forces m_n < r for any map. The converse (no hit in either direction
/// implies m_n >= r) needs d(T^i x, T^j y) to depend on i - j only and is
/// evaluated for rotation clouds.
DualityReport check_duality(const OrbitCloud& x, const OrbitCloud& y, std::size_t n, double r);

struct BridgeReport {
  std::size_t n = 0;
  std::size_t m_n = 0;         // M_n
  std::size_t neglog_min = 0;  // -log m_n under the symbolic metric
  std::size_t m_2n = 0;        // M_2n
  bool applies = false;        // -log m_n <= n
  bool holds = true;           // M_n - 1 <= -log m_n <= M_2n + 1
  bool holds_strict = true;    // the same without slack
};

/// max over i, j < n of the agreement length of x[i..] and y[j..]
/// (= -log m_n for d = e^-k). Sequences are read to their full length.
std::size_t symbolic_neglog_mindist(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n);

/// M_n <= -log m_n <= M_2n under the symbolic metric. Needs length >= 2n.
BridgeReport bridge_check(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n);

}  // namespace orbitmatch
