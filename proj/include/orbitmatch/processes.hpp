#pragma once

// Stochastic sources for the matching experiments and their exact
// collision (order-2 Renyi) entropies. Entropies are in nats.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "orbitmatch/core.hpp"
#include "orbitmatch/rng.hpp"

namespace orbitmatch {

/// Square row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::vector<std::vector<double>> rows() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct IidSource {
  std::vector<double> probs;
  friend bool operator==(const IidSource&, const IidSource&) = default;
};

struct MarkovSource {
  Matrix transition;
  std::optional<std::vector<double>> initial;  // stationary law when absent
  std::size_t burn_in = 0;                      // steps discarded before emitting
  friend bool operator==(const MarkovSource&, const MarkovSource&) = default;
};

/// Emits X_n = 1{Y_n = 0} for the hidden chain Y with Q(i,0) = q_i and
/// Q(i,i+1) = 1 - q_i; q_i = tail_value beyond the supplied array.
struct BinaryRenewalSource {
  std::vector<double> q;
  double tail_value = 0.5;
  friend bool operator==(const BinaryRenewalSource&, const BinaryRenewalSource&) = default;
};

using ProcessSpec = std::variant<IidSource, MarkovSource, BinaryRenewalSource>;

/// Throws InvalidArgument when the spec breaks its invariants.
void validate(const ProcessSpec& spec);
std::uint32_t alphabet_size(const ProcessSpec& spec);
std::string describe(const ProcessSpec& spec);

SymbolicSequence sample_process(const ProcessSpec& spec, std::size_t n, Rng& rng);

enum class EntropyMethod { Exact, Estimated };

struct EntropyValue {
  double h2 = 0;                        // nats per symbol
  EntropyMethod method = EntropyMethod::Exact;
  std::optional<std::size_t> k_used;    // block length for estimates
  std::optional<double> h2_plugin;      // plug-in variant, estimates only
  std::optional<std::uint64_t> collisions;
};

/// True when the transition graph is strongly connected with period 1.
bool is_primitive(const Matrix& transition);

/// Left fixed vector by power iteration (L1 residual < 1e-12, at most 1e5
/// iterations). Throws ConvergenceError for reducible or periodic chains.
std::vector<double> stationary_distribution(const Matrix& transition);

/// -log(sum p_i^2).
EntropyValue exact_h2_iid(const std::vector<double>& probs);

/// -log(lambda), lambda the Perron root of the entrywise square of P.
EntropyValue exact_h2_markov(const Matrix& transition);

/// Exact H2 when the source has a closed form (i.i.d. or Markov).
std::optional<EntropyValue> exact_h2(const ProcessSpec& spec);

/// The renewal source as an equivalent finite Markov chain on the hidden
/// states, with all states >= max(K,1) merged (they share return prob).
Matrix renewal_hidden_chain(const BinaryRenewalSource& spec);

}  // namespace orbitmatch
