#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "orbitmatch/error.hpp"
#include "orbitmatch/harness.hpp"

using namespace orbitmatch;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / "orbitmatch-tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Desk-scale variants of the defaults that finish in well under a second.
ExperimentConfig small_config(ExperimentKind kind) {
  auto c = default_config(kind);
  c.trials = 3;
  switch (kind) {
    case ExperimentKind::Lcs: c.schedule = {64, 4096, 2.0}; break;
    case ExperimentKind::MinDist: c.schedule = {16, 4096, 2.0}; break;
    case ExperimentKind::Dimension: c.analysis.n_points = 2000; break;
    case ExperimentKind::Entropy:
      c.analysis.n_points = 20000;
      c.analysis.k = 6;
      break;
    case ExperimentKind::Rotation: c.schedule = {100, 5000, 2.0}; break;
    case ExperimentKind::Bridge:
      c.trials = 20;
      c.analysis.n_values = {16, 64};
      break;
    case ExperimentKind::Duality: c.trials = 20; break;
    case ExperimentKind::Moments: c.analysis.n_points = 2000; break;
  }
  return c;
}

const ExperimentKind kAllKinds[] = {ExperimentKind::Lcs,      ExperimentKind::MinDist, ExperimentKind::Dimension,
                                    ExperimentKind::Entropy,  ExperimentKind::Rotation, ExperimentKind::Bridge,
                                    ExperimentKind::Duality,  ExperimentKind::Moments};

bool same_rows(const std::vector<SummaryRow>& a, const std::vector<SummaryRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind || a[i].quantity != b[i].quantity || a[i].target != b[i].target ||
        a[i].fitted != b[i].fitted || a[i].lo != b[i].lo || a[i].hi != b[i].hi || a[i].verdict != b[i].verdict) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("config text round trip") {
  for (auto kind : kAllKinds) {
    auto c = default_config(kind);
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK(serialize_config(parse_config(serialize_config(c))) == serialize_config(c));
    CHECK_NOTHROW(validate_config(c));
    CHECK(parse_kind(kind_name(kind)) == kind);
  }
  auto c = parse_config(
      "# comment\n[experiment]\nkind = lcs\nseed = 7\ntrials = 2\n\n"
      "[process]\ntype = markov\ntransition = 0.9 0.1; 0.5 0.5\n");
  CHECK(c.seed == 7);
  CHECK(c.trials == 2);
  REQUIRE(c.process.has_value());
  CHECK(std::holds_alternative<MarkovSource>(*c.process));
}

TEST_CASE("config errors name the line") {
  auto message = [](std::string_view text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[experiment]\nkind = lcs\nseed = abc\n").find("line 3") != std::string::npos);
  CHECK(message("[experiment]\nkind = lcs\nnot a pair\n").find("line 3") != std::string::npos);
  CHECK(message("[nope]\nx = 1\n").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = sorting\n"), ConfigError);

  auto bad = default_config(ExperimentKind::MinDist);
  bad.schedule.n_min = 1;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  auto no_map = default_config(ExperimentKind::Rotation);
  no_map.map->type = "expanding";
  CHECK_THROWS_AS(validate_config(no_map), ConfigError);
  auto lcs = default_config(ExperimentKind::Lcs);
  lcs.map = MapConfig{};
  CHECK_THROWS_AS(validate_config(lcs), ConfigError);
}

TEST_CASE("every kind runs, summarizes and replays") {
  for (auto kind : kAllKinds) {
    CAPTURE(kind_name(kind));
    const auto config = small_config(kind);
    const auto dir = scratch(std::string(kind_name(kind)));
    RunOptions opt;
    opt.out_dir = dir / "a";
    auto result = run_experiment(config, opt);
    CHECK(result.out_dir == opt.out_dir);
    CHECK(fs::exists(dir / "a" / "summary.csv"));
    CHECK(fs::exists(dir / "a" / "manifest.txt"));
    CHECK(fs::exists(dir / "a" / "config.ini"));
    CHECK_FALSE(result.summary.empty());
    CHECK(result.manifest.trial_seeds.size() == config.trials);
    CHECK(result.manifest.config_hash == sha256_hex(serialize_config(config)));
    CHECK(same_rows(summarize(config, dir / "a"), result.summary));

    // same seed, more workers: identical bytes
    opt.out_dir = dir / "b";
    opt.workers = 3;
    auto again = run_experiment(config, opt);
    CHECK(again.manifest.files == result.manifest.files);
    CHECK(verify_checksums(result.manifest, dir / "b").empty());

    auto replay = rerun_from_manifest(dir / "a" / "manifest.txt", dir / "c");
    CHECK(verify_checksums(result.manifest, dir / "c").empty());
    CHECK(same_rows(replay.summary, result.summary));

    auto read = read_manifest(dir / "a" / "manifest.txt");
    CHECK(read.kind == result.manifest.kind);
    CHECK(read.seed == config.seed);
    CHECK(read.trial_seeds == result.manifest.trial_seeds);
    CHECK(read.files == result.manifest.files);

    // a different seed changes the series
    auto other = config;
    other.seed += 1;
    opt.out_dir = dir / "d";
    opt.workers = 1;
    CHECK_FALSE(run_experiment(other, opt).manifest.files == result.manifest.files);
  }
}

TEST_CASE("tampered outputs are detected") {
  const auto dir = scratch("tamper");
  RunOptions opt;
  opt.out_dir = dir;
  auto result = run_experiment(small_config(ExperimentKind::MinDist), opt);
  {
    std::ofstream out(dir / "mindist_series.csv", std::ios::app);
    out << "9,9,9,9,9,0\n";
  }
  CHECK(verify_checksums(result.manifest, dir) == std::vector<std::string>{"mindist_series.csv"});
  {
    std::ofstream out(dir / "config.ini", std::ios::app);
    out << "# edited\n";
  }
  CHECK_THROWS_AS(rerun_from_manifest(dir / "manifest.txt", scratch("tamper-rerun")), ConfigError);
}

TEST_CASE("plot data") {
  const auto dir = scratch("plots");
  RunOptions opt;
  opt.out_dir = dir;
  run_experiment(small_config(ExperimentKind::MinDist), opt);
  auto files = emit_plot_data(dir);
  REQUIRE(files.size() == 1);
  std::istringstream in(slurp(files[0]));
  std::string line;
  std::getline(in, line);
  CHECK(line == "# neg_log_n log_m_n fit");
  std::size_t rows = 0, blanks = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      ++blanks;
      continue;
    }
    std::istringstream fields(line);
    double a, b, c;
    CHECK(static_cast<bool>(fields >> a >> b >> c));
    CHECK(a < 0);
    ++rows;
  }
  CHECK(rows > 0);
  CHECK(blanks >= 2);  // trials are separated

  const auto empty = scratch("plots-empty");
  fs::create_directories(empty);
  CHECK_THROWS_AS(emit_plot_data(empty), IoError);
}

TEST_CASE("output directory resolution") {
  auto c = default_config(ExperimentKind::Entropy);
  RunOptions opt;
  opt.out_dir = "/x/y";
  CHECK(resolve_output_dir(c, opt) == fs::path("/x/y"));
  opt.out_dir.clear();
  c.output = "/from/config";
  CHECK(resolve_output_dir(c, opt) == fs::path("/from/config"));
  c.output.clear();
  ::setenv("ORBITMATCH_OUT", "/env/root", 1);
  CHECK(resolve_output_dir(c, opt) == fs::path("/env/root/entropy"));
  ::unsetenv("ORBITMATCH_OUT");
  CHECK(resolve_output_dir(c, opt) == fs::path("out/entropy"));
}

TEST_CASE("exit codes and error records") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(NumericDegeneracy("x")) == 3);
  CHECK(exit_code_for(FitError("x", 2)) == 3);
  CHECK(exit_code_for(InvalidArgument("x")) == 1);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);

  auto j = nlohmann::json::parse(error_record_json(FitError("too few", 2)));
  CHECK(j["error"] == "FitError");
  CHECK(j["message"] == "too few");
  CHECK(j["exit_code"] == 3);
  CHECK(j["usable_points"] == 2);
  auto k = nlohmann::json::parse(error_record_json(ConfigError("bad key")));
  CHECK(k["error"] == "ConfigError");
  CHECK(k["exit_code"] == 2);
  CHECK_FALSE(k.contains("usable_points"));
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
