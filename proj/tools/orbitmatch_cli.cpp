// orbitmatch command line: one subcommand per experiment kind plus a raw
// sample generator.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "orbitmatch/config.hpp"
#include "orbitmatch/error.hpp"
#include "orbitmatch/harness.hpp"
#include "orbitmatch/orbits.hpp"
#include "orbitmatch/processes.hpp"

namespace fs = std::filesystem;
using namespace orbitmatch;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned workers = 1;
  bool strict = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "experiment config file")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "master seed (overrides the config)");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--workers", f.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  app->add_flag("--strict", f.strict, "exit 4 when a tolerance verdict fails");
}

ExperimentConfig load_for(const CommonFlags& f, std::optional<ExperimentKind> kind) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    c = load_config(f.config);
    if (kind && c.kind != *kind) {
      throw ConfigError("config kind '" + std::string(kind_name(c.kind)) + "' does not match subcommand '" +
                        std::string(kind_name(*kind)) + "'");
    }
  } else if (kind) {
    c = default_config(*kind);
  } else {
    throw ConfigError("--config or --kind is required");
  }
  if (f.seed) c.seed = *f.seed;
  return c;
}

void print_summary(const ExperimentResult& r, bool bits) {
  std::cout << "output: " << r.out_dir.string() << "\n";
  for (const auto& row : r.summary) {
    std::cout << "  " << row.quantity << " = " << format_real(row.fitted);
    if (bits && row.quantity.rfind("h2", 0) == 0) std::cout << " (" << format_real(row.fitted / std::log(2.0)) << " bits)";
    if (row.target) std::cout << "  target " << format_real(*row.target);
    if (row.lo || row.hi) {
      std::cout << "  [" << (row.lo ? format_real(*row.lo) : "-inf") << ", " << (row.hi ? format_real(*row.hi) : "inf")
                << "]";
    }
    std::cout << "  " << row.verdict << "\n";
  }
}

int finish(const ExperimentResult& r, const CommonFlags& f, bool bits = false) {
  print_summary(r, bits);
  if (f.strict && !r.passed()) return 4;
  return 0;
}

// Raw samples: a symbol file for [process] configs, an orbit cache plus CSV
// for [map] configs. Length defaults to schedule.n_max.
int simulate(const CommonFlags& f, std::size_t n_override, fs::path& out_dir) {
  if (f.config.empty()) throw ConfigError("simulate needs --config");
  ExperimentConfig c = load_for(f, std::nullopt);
  const std::size_t n = n_override ? n_override : c.schedule.n_max;
  out_dir = resolve_output_dir(c, RunOptions{f.out, f.workers});
  fs::create_directories(out_dir);
  Rng rng(c.seed);
  if (c.process) {
    auto seq = sample_process(*c.process, n, rng);
    std::ofstream os(out_dir / "sequence.txt");
    for (auto s : seq.symbols()) os << s << '\n';
    if (!os) throw IoError("cannot write sequence.txt");
    std::cout << "wrote " << n << " symbols to " << (out_dir / "sequence.txt").string() << "\n";
    return 0;
  }
  if (!c.map) throw ConfigError("simulate needs a [process] or [map] section");
  OrbitCloud cloud;
  if (c.map->type == "uniform") {
    cloud = iid_uniform_cloud(c.map->dim, n, c.map->metric, rng);
  } else {
    OrbitGenConfig g;
    g.n = n;
    g.seed = c.seed;
    g.burn_in = c.map->burn_in;
    g.digit_depth = c.map->digit_depth;
    g.metric = c.map->metric;
    cloud = generate_orbit(resolve_map(*c.map), g, rng);
  }
  save_orbit_cloud((out_dir / "orbit.orbc").string(), cloud);
  std::ofstream os(out_dir / "orbit.csv");
  os << "i";
  for (std::size_t d = 0; d < cloud.dim(); ++d) os << ",x" << d;
  os << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    os << i;
    for (auto v : cloud.point(i)) os << ',' << format_real(fixed_to_real(v));
    os << '\n';
  }
  if (!os) throw IoError("cannot write orbit.csv");
  std::cout << "wrote " << cloud.size() << " points to " << (out_dir / "orbit.orbc").string() << "\n";
  return 0;
}

void write_error(const std::exception& e, const fs::path& dir) {
  const std::string record = error_record_json(e);
  std::cerr << record << "\n";
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream os(dir / "error.json");
  if (os) os << record << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matching and shortest-distance scaling laws for random sequences and orbits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  struct Sub {
    const char* name;
    ExperimentKind kind;
    const char* help;
  };
  const Sub subs[] = {
      {"lcs", ExperimentKind::Lcs, "longest common substring growth"},
      {"mindist", ExperimentKind::MinDist, "shortest distance between two orbits"},
      {"dim", ExperimentKind::Dimension, "correlation dimension"},
      {"entropy", ExperimentKind::Entropy, "collision entropy estimate"},
      {"rotation", ExperimentKind::Rotation, "shortest distance exponents for a circle rotation"},
  };

  CommonFlags flags;
  bool bits = false;
  std::string kind_text, manifest;
  std::size_t sim_n = 0;
  std::vector<std::pair<CLI::App*, ExperimentKind>> kind_apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, flags);
    if (s.kind == ExperimentKind::Entropy) sub->add_flag("--bits", bits, "also print entropies in bits");
    kind_apps.emplace_back(sub, s.kind);
  }
  auto* sim = app.add_subcommand("simulate", "write raw samples for a config");
  add_common(sim, flags);
  sim->add_option("-n,--length", sim_n, "sample length (default schedule.n_max)");
  auto* exp = app.add_subcommand("experiment", "run any experiment kind, or rerun a manifest");
  add_common(exp, flags);
  exp->add_option("--kind", kind_text, "kind when no config is given");
  exp->add_option("--manifest", manifest, "rerun from manifest.txt")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  fs::path error_dir = flags.out.empty() ? fs::path("out") : fs::path(flags.out);
  try {
    if (sim->parsed()) return simulate(flags, sim_n, error_dir);
    if (exp->parsed()) {
      if (!manifest.empty()) {
        fs::path out = flags.out.empty() ? fs::path(manifest).parent_path() / "rerun" : fs::path(flags.out);
        error_dir = out;
        auto r = rerun_from_manifest(manifest, out, flags.workers);
        const auto bad = verify_checksums(read_manifest(manifest), out);
        for (const auto& name : bad) {
          if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
            std::cerr << "checksum differs: " << name << "\n";
          }
        }
        int code = finish(r, flags);
        const bool csv_mismatch = std::any_of(bad.begin(), bad.end(), [](const std::string& n) {
          return n.size() > 4 && n.substr(n.size() - 4) == ".csv";
        });
        return csv_mismatch ? 1 : code;
      }
      std::optional<ExperimentKind> kind;
      if (!kind_text.empty()) kind = parse_kind(kind_text);
      auto c = load_for(flags, kind);
      error_dir = resolve_output_dir(c, RunOptions{flags.out, flags.workers});
      return finish(run_experiment(c, RunOptions{flags.out, flags.workers}), flags, bits);
    }
    for (auto& [sub, kind] : kind_apps) {
      if (!sub->parsed()) continue;
      auto c = load_for(flags, kind);
      error_dir = resolve_output_dir(c, RunOptions{flags.out, flags.workers});
      return finish(run_experiment(c, RunOptions{flags.out, flags.workers}), flags, bits);
    }
  } catch (const std::exception& e) {
    write_error(e, error_dir);
    return exit_code_for(e);
  }
  return 1;
}
