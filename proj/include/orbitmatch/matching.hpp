#pragma once

// Longest common substring M_n of two length-n prefixes, and the
// block-collision estimator of the order-2 Renyi entropy.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orbitmatch/core.hpp"
#include "orbitmatch/fit.hpp"
#include "orbitmatch/processes.hpp"

namespace orbitmatch {

/// Suffix automaton over a word on {0..alphabet-1}, with dense transitions.
class SuffixAutomaton {
 public:
  SuffixAutomaton(std::span<const std::uint32_t> word, std::uint32_t alphabet_size);

  /// Longest substring of `text` that is also a substring of the word.
  std::size_t longest_common_substring(std::span<const std::uint32_t> text) const;

  std::size_t state_count() const noexcept { return len_.size(); }

 private:
  std::int32_t next(std::int32_t state, std::uint32_t c) const {
    return next_[static_cast<std::size_t>(state) * sigma_ + c];
  }
  std::int32_t add_state(std::int32_t len, std::int32_t link);
  void extend(std::uint32_t c);

  std::uint32_t sigma_;
  std::vector<std::int32_t> len_;
  std::vector<std::int32_t> link_;
  std::vector<std::int32_t> next_;
  std::int32_t last_ = 0;
};

/// Quadratic dynamic program over suffix agreement; the reference oracle.
std::size_t lcs_naive(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n);

/// Suffix automaton of x's prefix, streamed with y's prefix. O(n) time.
std::size_t lcs_fast(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n);

struct MatchProfile {
  Schedule schedule;
  std::vector<std::size_t> m_values;   // M_n aligned with the schedule
  std::string source;
  std::optional<SlopeFit> fit;         // M_n against log n, upper half of the schedule
  bool degenerate = false;             // M_n = n everywhere (identical prefixes)
};

MatchProfile match_profile(const SymbolicSequence& x, const SymbolicSequence& y,
                           const Schedule& schedule, std::string source = {});

/// -(1/k) log( sum_C N_C (N_C - 1) / (M (M - 1)) ) over the M overlapping
/// k-blocks; the plug-in variant sum (N_C/M)^2 is reported alongside.
/// Throws NumericDegeneracy when no block repeats.
EntropyValue renyi_collision_estimate(const SymbolicSequence& seq, std::size_t k);

}  // namespace orbitmatch
