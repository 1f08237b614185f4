#pragma once

// Experiment orchestration: runs a configured pipeline, writes per-trial
// CSV series, a summary with verdicts, plot-ready columns, and a manifest
// that is enough to rerun the experiment bit-for-bit.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "orbitmatch/config.hpp"

namespace orbitmatch {

inline constexpr std::string_view kVersion = "0.1.0";

struct SummaryRow {
  std::string kind;
  std::string quantity;
  std::optional<double> target;
  double fitted = 0;
  std::optional<double> lo;
  std::optional<double> hi;
  std::string verdict;  // pass | fail | report
};

struct RunManifest {
  std::string version{kVersion};
  std::string kind;
  std::string config_hash;   // sha256 of the canonical config text
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> trial_seeds;
  double wall_clock_seconds = 0;
  std::vector<std::pair<std::string, std::string>> files;  // name, sha256
};

struct RunOptions {
  std::filesystem::path out_dir;  // overrides config.output
  unsigned workers = 1;
};

struct ExperimentResult {
  std::filesystem::path out_dir;
  RunManifest manifest;
  std::vector<SummaryRow> summary;

  bool passed() const;  // no row has verdict "fail"
};

/// Output directory: options, then config.output, then $ORBITMATCH_OUT/<kind>,
/// then out/<kind>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options);

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Recomputes the summary rows from the series files in `dir`.
std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Writes <series>.plot.dat column files (x, y, fitted line) next to each
/// series CSV found in `dir`. Throws IoError when no series file exists.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

/// Reruns the experiment recorded in `manifest_path` (config.ini is read from
/// the same directory) into `out_dir`.
ExperimentResult rerun_from_manifest(const std::filesystem::path& manifest_path,
                                     const std::filesystem::path& out_dir, unsigned workers = 1);

/// Names of recorded files whose checksum differs in `dir` (empty = identical).
std::vector<std::string> verify_checksums(const RunManifest& manifest, const std::filesystem::path& dir);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Minimal CSV table: header plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws IoError when absent
};

CsvTable read_csv(const std::filesystem::path& path);

/// Exit code for an exception escaping run_experiment: 2 config, 3 numeric
/// degeneracy, 1 otherwise.
int exit_code_for(const std::exception& e);

/// {"error": type, "message": ..., "exit_code": n}
std::string error_record_json(const std::exception& e);

}  // namespace orbitmatch
