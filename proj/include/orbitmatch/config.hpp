#pragma once

// Experiment configuration: a sectioned key = value text format.
//
//   [experiment]  kind, seed, trials, output
//   [process]     type = iid | markov | renewal, with probs / transition,
//                 initial, burn_in / q, tail
//   [map]         type = expanding | ladder | beta | gauss | rotation |
//                 product | uniform, with m / beta / theta, eta_target /
//                 factors / dim, and metric, digit_depth, burn_in
//   [schedule]    n_min, n_max, ratio
//   [analysis]    per-kind knobs (see AnalysisConfig)
//   [tolerance]   rel, lo, hi, liminf_max, limsup_min
//
// Lists are space separated; matrix rows are separated by ';'. Lines
// starting with '#' or ';' are comments.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orbitmatch/core.hpp"
#include "orbitmatch/orbits.hpp"
#include "orbitmatch/processes.hpp"

namespace orbitmatch {

enum class ExperimentKind { Lcs, MinDist, Dimension, Entropy, Rotation, Bridge, Duality, Moments };

std::string_view kind_name(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view name);

struct MapConfig {
  std::string type = "expanding";
  std::uint32_t m = 2;
  double beta = 1.5;
  std::vector<std::uint32_t> factors;
  std::string theta = "golden";   // golden | sqrt2 | designed | 0x<32 hex digits>
  double eta_target = 2.0;        // theta = designed
  std::size_t dim = 1;            // type = uniform
  Metric metric = Metric::TorusMax;
  std::optional<std::size_t> digit_depth;
  std::optional<std::size_t> burn_in;

  friend bool operator==(const MapConfig&, const MapConfig&) = default;
};

/// Rotation uses n_min as the smallest n probed.
struct ScheduleConfig {
  std::size_t n_min = 1024;
  std::size_t n_max = 1u << 16;
  double ratio = 2.0;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct AnalysisConfig {
  std::size_t k = 10;                 // entropy: block length
  std::size_t n_points = 10000;       // dimension, moments: cloud size; entropy: sequence length
  std::vector<double> radii;          // dimension, moments; empty = default grid
  std::size_t theiler = 0;
  std::uint64_t min_pairs = 100;
  double max_fraction = 0.2;
  std::vector<std::size_t> n_values{16, 64, 256};  // bridge, duality
  double radius = 0.01;               // duality: ball radius

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct ToleranceConfig {
  std::optional<double> rel;
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<double> liminf_max;
  std::optional<double> limsup_min;

  friend bool operator==(const ToleranceConfig&, const ToleranceConfig&) = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Lcs;
  std::uint64_t seed = 1;
  std::size_t trials = 8;
  std::string output;
  std::optional<ProcessSpec> process;
  std::optional<MapConfig> map;
  ScheduleConfig schedule;
  AnalysisConfig analysis;
  ToleranceConfig tolerance;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError with the offending line on any syntax or value error.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: fixed section and key order, reals as %.17g.
std::string serialize_config(const ExperimentConfig& config);

/// Checks cross-field requirements for the kind (source present, sizes).
void validate_config(const ExperimentConfig& config);

/// The built-in desk-scale configuration for a kind.
ExperimentConfig default_config(ExperimentKind kind);

/// MapSpec for every map type except "uniform".
MapSpec resolve_map(const MapConfig& map);
Fixed128 resolve_theta(const MapConfig& map);

/// "%.17g".
std::string format_real(double v);

}  // namespace orbitmatch
