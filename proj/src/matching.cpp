#include "orbitmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "orbitmatch/error.hpp"

namespace orbitmatch {

namespace {

void check_pair(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n) {
  if (x.alphabet_size() != y.alphabet_size()) {
    throw AlphabetMismatch("sequences use alphabets of size " + std::to_string(x.alphabet_size()) +
                           " and " + std::to_string(y.alphabet_size()));
  }
  if (n > x.size() || n > y.size()) {
    throw InvalidArgument("n = " + std::to_string(n) + " exceeds a sequence length (" +
                          std::to_string(x.size()) + ", " + std::to_string(y.size()) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

SuffixAutomaton::SuffixAutomaton(std::span<const std::uint32_t> word, std::uint32_t alphabet_size)
    : sigma_(alphabet_size) {
  if (sigma_ == 0) throw InvalidArgument("alphabet size must be positive");
  const std::size_t max_states = 2 * word.size() + 1;
  if (max_states * sigma_ > (std::size_t{1} << 31)) {
    throw InvalidArgument("suffix automaton transition table too large for this alphabet");
  }
  len_.reserve(max_states);
  link_.reserve(max_states);
  next_.reserve(max_states * sigma_);
  add_state(0, -1);
  for (auto c : word) extend(c);
}

std::int32_t SuffixAutomaton::add_state(std::int32_t len, std::int32_t link) {
  len_.push_back(len);
  link_.push_back(link);
  next_.insert(next_.end(), sigma_, -1);
  return static_cast<std::int32_t>(len_.size() - 1);
}

void SuffixAutomaton::extend(std::uint32_t c) {
  const std::int32_t cur = add_state(len_[last_] + 1, -1);
  std::int32_t p = last_;
  while (p != -1 && next(p, c) == -1) {
    next_[static_cast<std::size_t>(p) * sigma_ + c] = cur;
    p = link_[p];
  }
  if (p == -1) {
    link_[cur] = 0;
  } else {
    const std::int32_t q = next(p, c);
    if (len_[p] + 1 == len_[q]) {
      link_[cur] = q;
    } else {
      const std::int32_t clone = add_state(len_[p] + 1, link_[q]);
      std::copy_n(next_.begin() + static_cast<std::ptrdiff_t>(q) * sigma_, sigma_,
                  next_.begin() + static_cast<std::ptrdiff_t>(clone) * sigma_);
      while (p != -1 && next(p, c) == q) {
        next_[static_cast<std::size_t>(p) * sigma_ + c] = clone;
        p = link_[p];
      }
      link_[q] = clone;
      link_[cur] = clone;
    }
  }
  last_ = cur;
}

std::size_t SuffixAutomaton::longest_common_substring(std::span<const std::uint32_t> text) const {
  std::int32_t state = 0;
  std::size_t current = 0, best = 0;
  for (auto c : text) {
    if (c >= sigma_) {
      state = 0;
      current = 0;
      continue;
    }
    while (state != 0 && next(state, c) == -1) {
      state = link_[state];
      current = static_cast<std::size_t>(len_[state]);
    }
    if (auto to = next(state, c); to != -1) {
      state = to;
      ++current;
    } else {
      current = 0;
    }
    best = std::max(best, current);
  }
  return best;
}

// ---------------------------------------------------------------------------

std::size_t lcs_naive(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n) {
  check_pair(x, y, n);
  // run[j+1] = length of the common suffix of x[..i] and y[..j].
  std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cur[j + 1] = x[i] == y[j] ? prev[j] + 1 : 0;
      best = std::max(best, cur[j + 1]);
    }
    prev.swap(cur);
  }
  return best;
}

std::size_t lcs_fast(const SymbolicSequence& x, const SymbolicSequence& y, std::size_t n) {
  check_pair(x, y, n);
  if (n == 0) return 0;
  SuffixAutomaton sam(x.symbols().first(n), x.alphabet_size());
  return sam.longest_common_substring(y.symbols().first(n));
}

MatchProfile match_profile(const SymbolicSequence& x, const SymbolicSequence& y,
                           const Schedule& schedule, std::string source) {
  check_pair(x, y, schedule.back());
  MatchProfile profile{schedule, {}, std::move(source), std::nullopt, false};
  profile.m_values.reserve(schedule.size());
  bool saturated = true;
  for (auto n : schedule.values()) {
    auto m = lcs_fast(x, y, n);
    profile.m_values.push_back(m);
    saturated = saturated && m == n;
  }
  profile.degenerate = saturated;

  std::vector<double> log_n, m;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    log_n.push_back(std::log(static_cast<double>(schedule[i])));
    m.push_back(static_cast<double>(profile.m_values[i]));
  }
  auto idx = upper_half(log_n);
  if (idx.size() >= 3) {
    std::vector<double> xs, ys;
    for (auto i : idx) {
      xs.push_back(log_n[i]);
      ys.push_back(m[i]);
    }
    profile.fit = fit_line(xs, ys);
  }
  return profile;
}

// ---------------------------------------------------------------------------

namespace {

// Sorted run lengths of equal items.
template <typename It, typename Eq>
std::vector<std::uint64_t> run_lengths(It first, It last, Eq eq) {
  std::vector<std::uint64_t> runs;
  for (auto it = first; it != last;) {
    auto end = std::find_if_not(it, last, [&](const auto& v) { return eq(v, *it); });
    runs.push_back(static_cast<std::uint64_t>(end - it));
    it = end;
  }
  return runs;
}

}  // namespace

EntropyValue renyi_collision_estimate(const SymbolicSequence& seq, std::size_t k) {
  if (k == 0) throw InvalidArgument("block length k must be >= 1");
  if (seq.size() < k + 1) throw InvalidArgument("sequence shorter than k + 1");
  const std::size_t windows = seq.size() - k + 1;
  const auto sigma = static_cast<u128>(seq.alphabet_size());
  auto sym = seq.symbols();

  // Fits in 64 bits when sigma^k <= 2^64.
  u128 span = 1;
  bool packed = true;
  for (std::size_t i = 0; i < k && packed; ++i) {
    span *= sigma;
    packed = span <= (u128{1} << 64);
  }

  std::vector<std::uint64_t> counts;
  if (packed) {
    const auto radix = static_cast<std::uint64_t>(sigma);
    const auto top = static_cast<std::uint64_t>(span / sigma);  // sigma^(k-1)
    std::vector<std::uint64_t> codes(windows);
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < k; ++i) code = code * radix + sym[i];
    codes[0] = code;
    for (std::size_t w = 1; w < windows; ++w) {
      code = (code - sym[w - 1] * top) * radix + sym[w + k - 1];
      codes[w] = code;
    }
    std::sort(codes.begin(), codes.end());
    counts = run_lengths(codes.begin(), codes.end(), std::equal_to<>{});
  } else {
    std::vector<std::size_t> starts(windows);
    std::iota(starts.begin(), starts.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(sym.begin() + a, sym.begin() + a + k, sym.begin() + b,
                                          sym.begin() + b + k);
    };
    std::sort(starts.begin(), starts.end(), less);
    counts = run_lengths(starts.begin(), starts.end(),
                         [&](std::size_t a, std::size_t b) { return !less(a, b) && !less(b, a); });
  }

  u128 pairs = 0;
  long double plug = 0;
  for (auto c : counts) {
    pairs += u128{c} * (c - 1);
    plug += static_cast<long double>(c) * static_cast<long double>(c);
  }
  if (pairs == 0) {
    throw NumericDegeneracy("no repeated " + std::to_string(k) + "-block among " +
                            std::to_string(windows) + " windows; k too large for the sample");
  }
  const long double total = static_cast<long double>(windows) * static_cast<long double>(windows - 1);
  const long double frac = static_cast<long double>(pairs) / total;
  const long double m = static_cast<long double>(windows);
  const double kk = static_cast<double>(k);

  EntropyValue value;
  value.method = EntropyMethod::Estimated;
  value.k_used = k;
  value.h2 = static_cast<double>(-std::log(frac)) / kk + 0.0;
  value.h2_plugin = static_cast<double>(-std::log(plug / (m * m))) / kk + 0.0;
  value.collisions = static_cast<std::uint64_t>(pairs / 2);
  return value;
}

}  // namespace orbitmatch
