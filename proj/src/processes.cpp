#include "orbitmatch/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "orbitmatch/error.hpp"

namespace orbitmatch {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr std::size_t kMaxPowerIterations = 100000;

void check_probability_vector(const std::vector<double>& p, const std::string& what) {
  if (p.empty()) throw InvalidArgument(what + ": empty probability vector");
  double sum = 0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(what + ": entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os << what << ": entries sum to " << sum;
    throw InvalidArgument(os.str());
  }
}

void check_stochastic(const Matrix& p) {
  if (p.size() == 0) throw InvalidArgument("transition matrix is empty");
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<double> row(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) row[j] = p(i, j);
    check_probability_vector(row, "transition row " + std::to_string(i));
  }
}

/// Cumulative table for inverse-CDF draws; last entry forced to 1.
std::vector<double> cumulative(const double* p, std::size_t n) {
  std::vector<double> c(n);
  std::partial_sum(p, p + n, c.begin());
  c.back() = 1.0;
  return c;
}

std::uint32_t draw(const std::vector<double>& cum, Rng& rng) {
  const double u = rng.uniform01();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;
  return static_cast<std::uint32_t>(it - cum.begin());
}

std::vector<std::vector<double>> row_tables(const Matrix& p) {
  std::vector<std::vector<double>> tables;
  tables.reserve(p.size());
  std::vector<double> row(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) row[j] = p(i, j);
    tables.push_back(cumulative(row.data(), row.size()));
  }
  return tables;
}

// Runs the chain for n steps after `burn_in`, starting from a draw of `start`.
template <typename Emit>
void run_chain(const Matrix& p, const std::vector<double>& start, std::size_t burn_in,
               std::size_t n, Rng& rng, Emit&& emit) {
  auto tables = row_tables(p);
  auto start_table = cumulative(start.data(), start.size());
  std::uint32_t state = draw(start_table, rng);
  for (std::size_t t = 0; t < burn_in; ++t) state = draw(tables[state], rng);
  for (std::size_t t = 0; t < n; ++t) {
    emit(state);
    if (t + 1 < n) state = draw(tables[state], rng);
  }
}

}  // namespace

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw InvalidArgument("transition matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> Matrix::rows() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
  }
  return out;
}

// ---------------------------------------------------------------------------

void validate(const ProcessSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IidSource>) {
          check_probability_vector(s.probs, "iid probabilities");
        } else if constexpr (std::is_same_v<T, MarkovSource>) {
          check_stochastic(s.transition);
          if (s.initial) {
            if (s.initial->size() != s.transition.size()) {
              throw InvalidArgument("initial law does not match the state count");
            }
            check_probability_vector(*s.initial, "initial law");
          }
        } else {
          // Uniform bound a <= q_i <= 1 - a for some a in (0, 1/2): every
          // supplied value strictly inside (0,1).
          auto in_range = [](double v) { return v > 0.0 && v < 1.0; };
          if (!in_range(s.tail_value)) throw InvalidArgument("renewal tail_value must lie in (0,1)");
          for (double v : s.q) {
            if (!in_range(v)) throw InvalidArgument("renewal q_i must lie in (0,1)");
          }
        }
      },
      spec);
}

std::uint32_t alphabet_size(const ProcessSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::uint32_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IidSource>) return static_cast<std::uint32_t>(s.probs.size());
        else if constexpr (std::is_same_v<T, MarkovSource>) return static_cast<std::uint32_t>(s.transition.size());
        else return 2;
      },
      spec);
}

std::string describe(const ProcessSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IidSource>) {
          os << "iid(";
          for (std::size_t i = 0; i < s.probs.size(); ++i) os << (i ? "," : "") << s.probs[i];
          os << ")";
        } else if constexpr (std::is_same_v<T, MarkovSource>) {
          os << "markov(";
          for (std::size_t i = 0; i < s.transition.size(); ++i) {
            os << (i ? ";" : "");
            for (std::size_t j = 0; j < s.transition.size(); ++j) os << (j ? "," : "") << s.transition(i, j);
          }
          os << ")";
        } else {
          os << "renewal(q=";
          for (std::size_t i = 0; i < s.q.size(); ++i) os << (i ? "," : "") << s.q[i];
          os << ";tail=" << s.tail_value << ")";
        }
      },
      spec);
  return os.str();
}

Matrix renewal_hidden_chain(const BinaryRenewalSource& spec) {
  const std::size_t lump = std::max<std::size_t>(spec.q.size(), 1);
  Matrix p(lump + 1);
  for (std::size_t i = 0; i < lump; ++i) {
    double q = i < spec.q.size() ? spec.q[i] : spec.tail_value;
    p(i, 0) += q;
    p(i, i + 1) += 1.0 - q;
  }
  p(lump, 0) += spec.tail_value;
  p(lump, lump) += 1.0 - spec.tail_value;
  return p;
}

SymbolicSequence sample_process(const ProcessSpec& spec, std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidArgument("sample_process needs n >= 1");
  validate(spec);
  std::vector<std::uint32_t> out;
  out.reserve(n);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IidSource>) {
          auto table = cumulative(s.probs.data(), s.probs.size());
          for (std::size_t t = 0; t < n; ++t) out.push_back(draw(table, rng));
        } else if constexpr (std::is_same_v<T, MarkovSource>) {
          const auto start = s.initial ? *s.initial : stationary_distribution(s.transition);
          run_chain(s.transition, start, s.burn_in, n, rng, [&](std::uint32_t st) { out.push_back(st); });
        } else {
          const Matrix hidden = renewal_hidden_chain(s);
          const auto start = stationary_distribution(hidden);
          run_chain(hidden, start, 0, n, rng, [&](std::uint32_t st) { out.push_back(st == 0 ? 1u : 0u); });
        }
      },
      spec);
  return SymbolicSequence(alphabet_size(spec), std::move(out));
}

// ---------------------------------------------------------------------------

bool is_primitive(const Matrix& p) {
  const std::size_t n = p.size();
  if (n == 0) return false;
  // BFS levels from state 0 over positive entries; the period is the gcd of
  // level[u] + 1 - level[v] over all edges u -> v.
  std::vector<long> level(n, -1);
  std::queue<std::size_t> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    auto u = frontier.front();
    frontier.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0 && level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      }
    }
  }
  if (std::any_of(level.begin(), level.end(), [](long l) { return l < 0; })) return false;
  // Reverse reachability to 0.
  std::vector<bool> back(n, false);
  back[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    auto v = frontier.front();
    frontier.pop();
    for (std::size_t u = 0; u < n; ++u) {
      if (p(u, v) > 0 && !back[u]) {
        back[u] = true;
        frontier.push(u);
      }
    }
  }
  if (std::find(back.begin(), back.end(), false) != back.end()) return false;
  long period = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0) period = std::gcd(period, std::abs(level[u] + 1 - level[v]));
    }
  }
  return period == 1;
}

std::vector<double> stationary_distribution(const Matrix& p) {
  check_stochastic(p);
  if (!is_primitive(p)) {
    throw ConvergenceError("transition matrix is reducible or periodic; no unique limiting law");
  }
  const std::size_t n = p.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (std::size_t iter = 0; iter < kMaxPowerIterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (pi[i] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * p(i, j);
    }
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    double residual = 0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      residual += std::abs(next[j] - pi[j]);
    }
    pi.swap(next);
    if (residual < 1e-12) return pi;
  }
  throw ConvergenceError("stationary_distribution did not converge in 1e5 iterations");
}

EntropyValue exact_h2_iid(const std::vector<double>& probs) {
  check_probability_vector(probs, "iid probabilities");
  double collision = 0;
  for (double p : probs) collision += p * p;
  if (std::any_of(probs.begin(), probs.end(), [](double p) { return p == 1.0; }) || collision >= 1.0) {
    throw NumericDegeneracy("degenerate distribution: H2 = 0");
  }
  return EntropyValue{-std::log(collision), EntropyMethod::Exact, std::nullopt, std::nullopt, std::nullopt};
}

EntropyValue exact_h2_markov(const Matrix& transition) {
  check_stochastic(transition);
  if (!is_primitive(transition)) {
    throw ConvergenceError("transition matrix is reducible or periodic; H2 undefined");
  }
  const std::size_t n = transition.size();
  Matrix sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sq(i, j) = transition(i, j) * transition(i, j);
  }
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n);
  for (std::size_t iter = 0; iter < kMaxPowerIterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += sq(i, j) * v[j];
      w[i] = s;
    }
    double lambda = 0, norm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lambda += v[i] * w[i];  // Rayleigh quotient, |v| = 1
      norm += w[i] * w[i];
    }
    norm = std::sqrt(norm);
    double residual = 0;
    for (std::size_t i = 0; i < n; ++i) residual += (w[i] - lambda * v[i]) * (w[i] - lambda * v[i]);
    residual = std::sqrt(residual);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (lambda > 0 && residual < 1e-12 * lambda) {
      if (lambda >= 1.0) throw NumericDegeneracy("Perron root of squared matrix is 1: H2 = 0");
      return EntropyValue{-std::log(lambda), EntropyMethod::Exact, std::nullopt, std::nullopt, std::nullopt};
    }
  }
  throw ConvergenceError("Perron root power iteration did not converge");
}

std::optional<EntropyValue> exact_h2(const ProcessSpec& spec) {
  if (auto* iid = std::get_if<IidSource>(&spec)) return exact_h2_iid(iid->probs);
  if (auto* mk = std::get_if<MarkovSource>(&spec)) return exact_h2_markov(mk->transition);
  return std::nullopt;
}

}  // namespace orbitmatch
