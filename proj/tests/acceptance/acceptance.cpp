// Acceptance run: one pass/fail line per criterion, exit 1 if any fails.
//
//   acceptance                 all criteria
//   acceptance --criterion 5   just one

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "orbitmatch/estimators.hpp"
#include "orbitmatch/harness.hpp"
#include "orbitmatch/matching.hpp"
#include "orbitmatch/mindist.hpp"
#include "orbitmatch/orbits.hpp"
#include "orbitmatch/processes.hpp"
#include "orbitmatch/rotation.hpp"

using namespace orbitmatch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

fs::path g_root;
unsigned g_workers = 1;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ExperimentResult run(const ExperimentConfig& c, const std::string& name) {
  RunOptions opt;
  opt.out_dir = g_root / name;
  opt.workers = g_workers;
  fs::remove_all(opt.out_dir);
  return run_experiment(c, opt);
}

double fitted(const ExperimentResult& r, const std::string& quantity) {
  for (const auto& row : r.summary) {
    if (row.quantity == quantity) return row.fitted;
  }
  throw std::runtime_error("summary has no row " + quantity);
}

void band(Outcome& o, const std::string& label, double v, double lo, double hi) {
  o.require(v >= lo && v <= hi, label + " = " + fmt(v) + " in [" + fmt(lo) + ", " + fmt(hi) + "]");
}

void budget(Outcome& o, const std::string& label, double secs, double limit) {
  o.require(secs < limit, label + " " + fmt(secs, 3) + " s < " + fmt(limit) + " s");
}

const Matrix kChain = Matrix::from_rows({{0.9, 0.1}, {0.5, 0.5}});

// ---------------------------------------------------------------------------

Outcome c1() {
  Outcome o;
  auto x = SymbolicSequence::from_string("ACAATGAGAGGATGACCTTG", "ACGT");
  auto y = SymbolicSequence::from_string("TGACTGTAACTGACACAAGC", "ACGT");
  auto t0 = Clock::now();
  const auto naive = lcs_naive(x, y, 20);
  const double t_naive = seconds_since(t0);
  t0 = Clock::now();
  const auto fast = lcs_fast(x, y, 20);
  const double t_fast = seconds_since(t0);
  o.require(naive == 4, "naive = " + std::to_string(naive));
  o.require(fast == 4, "fast = " + std::to_string(fast));
  budget(o, "naive", t_naive, 1e-3);
  budget(o, "fast", t_fast, 1e-3);
  return o;
}

Outcome c2() {
  Outcome o;
  auto c = default_config(ExperimentKind::Lcs);
  c.process = IidSource{{0.5, 0.5}};
  c.schedule = {1u << 10, 1u << 22, 2.0};
  c.trials = 8;
  const auto t0 = Clock::now();
  auto r = run(c, "c2");
  const double target = 2 / std::log(2.0);
  band(o, "median slope", fitted(r, "slope_M_n_vs_log_n"), 0.85 * target, 1.15 * target);
  budget(o, "runtime", seconds_since(t0), 120);
  return o;
}

Outcome c3() {
  Outcome o;
  const double h2 = exact_h2_markov(kChain).h2;
  const double closed = oracle::h2_markov_2x2(0.9, 0.1, 0.5, 0.5);
  o.require(std::abs(h2 - closed) < 1e-12, "H2 = " + fmt(h2, 8) + " vs closed form " + fmt(closed, 8));
  auto c = default_config(ExperimentKind::Lcs);
  c.process = MarkovSource{kChain, std::nullopt, 0};
  c.schedule = {1u << 10, 1u << 22, 2.0};
  c.trials = 8;
  const auto t0 = Clock::now();
  auto r = run(c, "c3");
  const double target = 2 / h2;
  band(o, "median slope", fitted(r, "slope_M_n_vs_log_n"), 0.8 * target, 1.2 * target);
  budget(o, "runtime", seconds_since(t0), 180);
  return o;
}

Outcome c4() {
  Outcome o;
  const auto t0 = Clock::now();
  auto c = default_config(ExperimentKind::Entropy);
  c.analysis.n_points = 1000000;
  c.analysis.k = 10;
  c.trials = 8;
  auto iid = run(c, "c4-iid");
  const double log2 = std::log(2.0);
  band(o, "iid H2(k=10)", fitted(iid, "h2_collision_k10"), 0.95 * log2, 1.05 * log2);
  c.process = MarkovSource{kChain, std::nullopt, 0};
  auto markov = run(c, "c4-markov");
  const double h2 = exact_h2_markov(kChain).h2;
  band(o, "markov H2(k=10)", fitted(markov, "h2_collision_k10"), 0.93 * h2, 1.07 * h2);
  budget(o, "runtime", seconds_since(t0), 30);
  return o;
}

Outcome mindist_criterion(const MapConfig& map, const std::string& name, double lo, double hi, double limit) {
  Outcome o;
  auto c = default_config(ExperimentKind::MinDist);
  c.map = map;
  c.schedule = {100, 100000, 2.0};
  c.trials = 8;
  const auto t0 = Clock::now();
  auto r = run(c, name);
  band(o, "median slope", fitted(r, "slope_log_m_n_vs_neg_log_n"), lo, hi);
  budget(o, "runtime", seconds_since(t0), limit);
  return o;
}

Outcome c5() {
  MapConfig m;
  m.type = "expanding";
  m.m = 2;
  return mindist_criterion(m, "c5", 1.6, 2.4, 60);
}

Outcome c6() {
  MapConfig m;
  m.type = "product";
  m.factors = {2, 3};
  return mindist_criterion(m, "c6", 0.8, 1.25, 120);
}

Outcome c7() {
  MapConfig m;
  m.type = "gauss";
  return mindist_criterion(m, "c7", 1.5, 2.5, 60);
}

Outcome c8() {
  Outcome o;
  for (std::size_t d : {1, 2}) {
    auto c = default_config(ExperimentKind::Dimension);
    c.map->type = "uniform";
    c.map->dim = d;
    c.analysis.n_points = 10000;
    const auto t0 = Clock::now();
    auto r = run(c, "c8-d" + std::to_string(d));
    const double v = fitted(r, "correlation_dimension");
    if (d == 1) band(o, "circle", v, 0.9, 1.1);
    else band(o, "2-torus", v, 1.85, 2.15);
    budget(o, "runtime", seconds_since(t0), 30);
  }
  return o;
}

Outcome c9() {
  Outcome o;
  auto c = default_config(ExperimentKind::Rotation);
  c.map->theta = "golden";
  c.schedule = {1000, 1000000, 2.0};
  c.trials = 8;
  const auto t0 = Clock::now();
  auto r = run(c, "c9");
  band(o, "geometric max", fitted(r, "limsup_exponent_geometric"), 0.8, 1.2);
  band(o, "q_k min", fitted(r, "liminf_exponent_convergents"), 0.8, 1.2);
  budget(o, "runtime", seconds_since(t0), 60);
  return o;
}

Outcome c10() {
  Outcome o;
  auto c = default_config(ExperimentKind::Rotation);
  c.map->theta = "designed";
  c.map->eta_target = 2.0;
  c.schedule = {1000, 1000000, 2.0};
  c.trials = 8;
  const auto t0 = Clock::now();
  auto r = run(c, "c10");
  const double liminf = fitted(r, "liminf_exponent_convergents");
  const double limsup = fitted(r, "limsup_exponent_geometric");
  o.require(liminf <= 0.65, "q_k min = " + fmt(liminf) + " <= 0.65");
  o.require(limsup >= 0.85, "geometric max = " + fmt(limsup) + " >= 0.85");
  budget(o, "runtime", seconds_since(t0), 120);
  return o;
}

// ---------------------------------------------------------------------------

SymbolicSequence random_word(Rng& rng, std::size_t n, std::uint32_t sigma) {
  std::vector<std::uint32_t> v(n);
  for (auto& s : v) s = static_cast<std::uint32_t>(rng.uniform_below(sigma));
  return SymbolicSequence(sigma, v);
}

std::vector<std::uint32_t> symbols(const SymbolicSequence& s) { return {s.symbols().begin(), s.symbols().end()}; }

OrbitCloud random_cloud(Rng& rng, std::size_t n, std::size_t d, Metric metric) {
  std::vector<Fixed64> c(n * d);
  for (auto& v : c) {
    const auto mode = rng.uniform_below(8);
    v = mode == 0 ? rng.next() >> 44 : rng.next();
  }
  return OrbitCloud(d, metric, std::move(c));
}

oracle::cpp_int big(u128 v) {
  return (oracle::cpp_int(static_cast<std::uint64_t>(v >> 64)) << 64) + static_cast<std::uint64_t>(v);
}

Outcome c11() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(1101);

  std::size_t bad = 0;
  for (int t = 0; t < 500; ++t) {
    const std::uint32_t sigma = 2 + static_cast<std::uint32_t>(rng.uniform_below(3));
    const std::size_t n = 1 + rng.uniform_below(200);
    auto x = random_word(rng, n, sigma), y = random_word(rng, n, sigma);
    const auto fast = lcs_fast(x, y, n);
    bad += fast != lcs_naive(x, y, n) || fast != oracle::lcs_brute(symbols(x), symbols(y), n);
  }
  o.require(bad == 0, "lcs mismatches " + std::to_string(bad) + "/500");

  bad = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + t % 3;
    const Metric metric = (t / 3) % 2 ? Metric::TorusEuclid : Metric::TorusMax;
    const std::size_t n = 2 + rng.uniform_below(499);
    auto x = random_cloud(rng, n, d, metric), y = random_cloud(rng, n, d, metric);
    Schedule sched({n});
    if (n >= 4) sched = geometric_schedule(2, n, 2.0);
    auto p = mindist_fast(x, y, sched);
    for (std::size_t s = 0; s < sched.size(); ++s) {
      oracle::cpp_int best = -1;
      for (std::size_t i = 0; i < sched[s]; ++i) {
        for (std::size_t j = 0; j < sched[s]; ++j) {
          auto v = oracle::dist_num(x.point(i).data(), y.point(j).data(), d, metric == Metric::TorusEuclid);
          if (best < 0 || v < best) best = v;
        }
      }
      bad += p.keys[s] != mindist_naive_key(x, y, sched[s]) || big(p.keys[s].value) != best;
    }
  }
  o.require(bad == 0, "mindist mismatches " + std::to_string(bad) + " over 200 instances");

  bad = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + t % 3;
    const Metric metric = (t / 3) % 2 ? Metric::TorusEuclid : Metric::TorusMax;
    const std::size_t n = 2 + rng.uniform_below(499);
    auto c = random_cloud(rng, n, d, metric);
    const std::vector<double> radii{0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.003};
    CorrelationOptions opt;
    opt.theiler = t % 5;
    auto curve = correlation_sum(c, radii, opt);
    const std::size_t gap = std::max<std::size_t>(opt.theiler, 1);
    for (std::size_t s = 0; s < radii.size(); ++s) {
      std::uint64_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + gap; j < n; ++j) {
          count += oracle::dist_below(c.point(i).data(), c.point(j).data(), d, metric == Metric::TorusEuclid, radii[s]);
        }
      }
      bad += count != curve.pair_counts[s];
    }
  }
  o.require(bad == 0, "correlation-sum mismatches " + std::to_string(bad) + " over 100 clouds");
  budget(o, "runtime", seconds_since(t0), 60);
  return o;
}

Outcome c12() {
  Outcome o;
  Rng rng(1201);

  {  // M_n <= -log m_n <= M_2n, slack 1, when -log m_n <= n
    std::size_t instances = 0, fails = 0, strict_fails = 0;
    const ProcessSpec sources[] = {IidSource{{0.5, 0.5}}, IidSource{{0.25, 0.25, 0.25, 0.25}},
                                  MarkovSource{kChain, std::nullopt, 0}};
    for (int t = 0; instances < 1200; ++t) {
      const std::size_t n = std::size_t{16} << (2 * (t % 3));
      Rng r = rng.split(static_cast<std::uint64_t>(t));
      const auto& src = sources[t % 3];
      auto x = sample_process(src, 2 * n, r), y = sample_process(src, 2 * n, r);
      auto rep = bridge_check(x, y, n);
      if (!rep.applies) continue;
      ++instances;
      fails += !rep.holds;
      strict_fails += !rep.holds_strict;
    }
    o.require(fails == 0, "sandwich failures " + std::to_string(fails) + "/" + std::to_string(instances) +
                              " (strict " + std::to_string(strict_fails) + ")");
  }

  {  // hitting-time duality, both directions
    const std::vector<MapSpec> maps{ExpandingInteger{2}, BetaMap{1.6}, GaussMap{}, DyadicLadder{},
                                    ProductExpanding{{2, 3}}};
    std::size_t forward = 0, converse = 0, fails = 0, t = 0;
    while ((forward < 1000 || converse < 1000) && t < 200000) {
      const bool rotation = t % 2 == 0;
      const MapSpec map = rotation ? MapSpec{Rotation{(Fixed128{rng.next()} << 64) | rng.next()}}
                                   : maps[(t / 2) % maps.size()];
      ++t;
      OrbitGenConfig cfg;
      cfg.n = 256;
      cfg.seed = rng.next();
      auto x = generate_orbit(map, cfg);
      cfg.seed = rng.next();
      auto y = generate_orbit(map, cfg);
      const std::size_t n = 2 + rng.uniform_below(255);
      const double r = std::exp(-2 - 7 * rng.uniform01());
      auto rep = check_duality(x, y, n, r);
      fails += !rep.passed();
      forward += rep.forward_applies;
      converse += rep.converse_applies;
    }
    o.require(fails == 0 && forward >= 1000 && converse >= 1000,
              "duality failures " + std::to_string(fails) + " (" + std::to_string(forward) + " forward, " +
                  std::to_string(converse) + " converse)");
  }

  {  // convergent bounds on random angles
    std::size_t checks = 0, fails = 0;
    for (int t = 0; t < 1000; ++t) {
      const Fixed128 theta = (Fixed128{rng.next()} << 64) | rng.next();
      if (theta == 0) continue;
      for (const auto& c : check_qk_bounds(theta, cf_expand(theta, 256))) {
        ++checks;
        fails += !(c.lower_ok && c.upper_ok && c.approx_ok);
      }
    }
    o.require(fails == 0, "q_k bound failures " + std::to_string(fails) + "/" + std::to_string(checks) +
                              " levels over 1000 angles");
  }

  {  // monotone profiles
    std::size_t fails = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = 64 + rng.uniform_below(2000);
      auto sched = geometric_schedule(4, n, 1.5);
      auto x = random_word(rng, n, 2), y = random_word(rng, n, 2);
      auto mp = match_profile(x, y, sched);
      auto cx = random_cloud(rng, n, 1 + t % 3, Metric::TorusMax), cy = random_cloud(rng, n, 1 + t % 3, Metric::TorusMax);
      auto md = mindist_fast(cx, cy, sched);
      auto cs = correlation_sum(cx, {0.3, 0.1, 0.03, 0.01, 0.003});
      for (std::size_t s = 1; s < sched.size(); ++s) {
        fails += mp.m_values[s] < mp.m_values[s - 1];
        fails += md.keys[s] > md.keys[s - 1];
      }
      for (std::size_t s = 1; s < cs.pair_counts.size(); ++s) fails += cs.pair_counts[s] > cs.pair_counts[s - 1];
    }
    o.require(fails == 0, "monotonicity failures " + std::to_string(fails) + " over 1000 instances");
  }

  {  // synthetic power laws
    std::size_t fails = 0;
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
      const double slope = 0.5 + 3 * rng.uniform01();
      const double scale = std::exp(4 * rng.uniform01() - 2);
      auto sched = geometric_schedule(10 + rng.uniform_below(100), 100000 + rng.uniform_below(1000000), 1.5 + rng.uniform01());
      std::vector<double> m;
      for (auto n : sched.values()) m.push_back(scale * std::pow(static_cast<double>(n), -slope));
      const double err = std::abs(exponent_series(MinDistProfile::from_values(sched, m)).fit.slope - slope);
      worst = std::max(worst, err);
      fails += !(err < 1e-9);
    }
    o.require(fails == 0, "slope recovery worst error " + fmt(worst, 3));
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c13() {
  Outcome o;
  const ExperimentKind kinds[] = {ExperimentKind::Lcs,      ExperimentKind::MinDist, ExperimentKind::Dimension,
                                  ExperimentKind::Entropy,  ExperimentKind::Rotation, ExperimentKind::Bridge,
                                  ExperimentKind::Duality,  ExperimentKind::Moments};
  for (auto kind : kinds) {
    auto c = default_config(kind);
    // moderate sizes: every pipeline stage runs, the sweep stays quick
    switch (kind) {
      case ExperimentKind::Lcs: c.schedule = {1u << 10, 1u << 16, 2.0}; break;
      case ExperimentKind::MinDist: c.schedule = {100, 20000, 2.0}; break;
      case ExperimentKind::Entropy: c.analysis.n_points = 100000; break;
      case ExperimentKind::Rotation: c.schedule = {1000, 100000, 2.0}; break;
      default: break;
    }
    const std::string name = "c13-" + std::string(kind_name(kind));
    auto first = run(c, name);
    const fs::path again = g_root / (name + "-rerun");
    fs::remove_all(again);
    rerun_from_manifest(first.out_dir / "manifest.txt", again, g_workers);
    std::size_t csvs = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(first.out_dir)) {
      if (e.path().extension() != ".csv") continue;
      ++csvs;
      differ += slurp(e.path()) != slurp(again / e.path().filename());
    }
    o.require(csvs > 0 && differ == 0, std::string(kind_name(kind)) + " " + std::to_string(csvs - differ) + "/" +
                                           std::to_string(csvs) + " CSVs identical");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orbitmatch acceptance run"};
  int only = 0;
  std::string out = (fs::temp_directory_path() / "orbitmatch-acceptance").string();
  app.add_option("--criterion", only, "run a single criterion (1-13)")->check(CLI::Range(1, 13));
  app.add_option("--out", out, "scratch directory for experiment outputs");
  app.add_option("--workers", g_workers, "worker threads for the experiment runs");
  CLI11_PARSE(app, argc, argv);
  g_root = out;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"DNA example", c1},
      {"i.i.d. LCS growth", c2},
      {"Markov LCS growth", c3},
      {"collision entropy", c4},
      {"doubling map shortest distance", c5},
      {"product map shortest distance", c6},
      {"Gauss map shortest distance", c7},
      {"correlation dimension", c8},
      {"golden rotation exponents", c9},
      {"designed eta = 2 rotation exponents", c10},
      {"oracle equivalence", c11},
      {"structural identities", c12},
      {"reproducibility", c13},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << "  (" << fmt(seconds_since(t0), 3) << " s)" << std::endl;
  }
  return all ? 0 : 1;
}
