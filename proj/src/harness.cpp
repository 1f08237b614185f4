#include "orbitmatch/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include <openssl/evp.h>

#include "orbitmatch/error.hpp"
#include "orbitmatch/estimators.hpp"
#include "orbitmatch/matching.hpp"
#include "orbitmatch/mindist.hpp"
#include "orbitmatch/orbits.hpp"
#include "orbitmatch/parallel.hpp"
#include "orbitmatch/processes.hpp"
#include "orbitmatch/rotation.hpp"

namespace fs = std::filesystem;

namespace orbitmatch {

namespace {

// ---------------------------------------------------------------------------
// CSV and file helpers

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void append(const Table& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }

  std::string text() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

std::string str(double v) { return format_real(v); }
std::string str(std::size_t v) { return std::to_string(v); }
std::string str(std::uint64_t v, int) { return std::to_string(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << data;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double cell_real(const std::string& s) {
  if (s == "nan") return std::nan("");
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw IoError("not a number: '" + s + "'");
  return v;
}


double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------------------
// Sources

OrbitCloud make_cloud(const MapConfig& m, const std::optional<MapSpec>& spec, std::size_t n, std::uint64_t seed,
                      Rng& rng) {
  if (m.type == "uniform") return iid_uniform_cloud(m.dim, n, m.metric, rng);
  OrbitGenConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.burn_in = m.burn_in;
  cfg.digit_depth = m.digit_depth;
  cfg.metric = m.metric;
  return generate_orbit(*spec, cfg, rng);
}

std::optional<MapSpec> resolved(const ExperimentConfig& c) {
  if (!c.map || c.map->type == "uniform") return std::nullopt;
  return resolve_map(*c.map);
}

double cloud_dimension(const MapConfig& m) {
  if (m.type == "uniform") return static_cast<double>(m.dim);
  if (m.type == "product") return static_cast<double>(m.factors.size());
  return 1.0;
}

double rotation_eta(const MapConfig& m) {
  if (m.theta == "golden" || m.theta == "sqrt2") return 1.0;
  if (m.theta == "designed") return m.eta_target;
  return eta_estimate(cf_expand(resolve_theta(m), 256)).eta;
}

// ---------------------------------------------------------------------------
// Verdict helpers

struct Band {
  std::optional<double> target, lo, hi;
};

Band band(const ToleranceConfig& tol, double target, double default_lo_factor, double default_hi_factor) {
  Band b{target, target * default_lo_factor, target * default_hi_factor};
  if (tol.rel) {
    b.lo = target * (1 - *tol.rel);
    b.hi = target * (1 + *tol.rel);
  }
  if (tol.lo) b.lo = *tol.lo;
  if (tol.hi) b.hi = *tol.hi;
  return b;
}

SummaryRow judged(const ExperimentConfig& c, std::string quantity, const Band& b, double fitted) {
  SummaryRow row{std::string(kind_name(c.kind)), std::move(quantity), b.target, fitted, b.lo, b.hi, "report"};
  if (b.lo || b.hi) {
    const bool ok = !std::isnan(fitted) && (!b.lo || fitted >= *b.lo) && (!b.hi || fitted <= *b.hi);
    row.verdict = ok ? "pass" : "fail";
  }
  return row;
}

SummaryRow reported(const ExperimentConfig& c, std::string quantity, double fitted,
                    std::optional<double> target = std::nullopt) {
  return SummaryRow{std::string(kind_name(c.kind)), std::move(quantity), target, fitted, std::nullopt,
                    std::nullopt, "report"};
}

SummaryRow zero_failures(const ExperimentConfig& c, std::string quantity, std::size_t failures) {
  return SummaryRow{std::string(kind_name(c.kind)), std::move(quantity), 0.0, static_cast<double>(failures),
                    0.0, 0.0, failures == 0 ? "pass" : "fail"};
}

std::vector<double> column_reals(const CsvTable& t, std::string_view name) {
  std::vector<double> out;
  const std::size_t col = t.column(name);
  for (const auto& r : t.rows) out.push_back(cell_real(r.at(col)));
  return out;
}

std::size_t count_rows(const CsvTable& t, std::string_view name_a, std::string_view name_b) {
  // rows where column a is 1 and column b is 0
  const std::size_t a = t.column(name_a), b = t.column(name_b);
  std::size_t n = 0;
  for (const auto& r : t.rows) n += r.at(a) == "1" && r.at(b) == "0";
  return n;
}

std::size_t count_true(const CsvTable& t, std::string_view name) {
  const std::size_t a = t.column(name);
  std::size_t n = 0;
  for (const auto& r : t.rows) n += r.at(a) == "1";
  return n;
}

// ---------------------------------------------------------------------------
// Pipelines. Each fills tables row-ordered by trial.

using Tables = std::vector<Table>;

template <typename TrialFn>
std::vector<Tables> per_trial(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers,
                              TrialFn&& fn) {
  std::vector<Tables> out(c.trials);
  parallel_for(c.trials, workers, [&](std::size_t t) { out[t] = fn(t, seeds[t]); });
  return out;
}

Tables merge(const std::vector<Tables>& parts) {
  Tables merged = parts.front();
  for (auto& t : merged) t.rows.clear();
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.size(); ++i) merged[i].append(p[i]);
  }
  return merged;
}

Tables run_lcs(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const ProcessSpec spec = *c.process;
  const Schedule sched = geometric_schedule(c.schedule.n_min, c.schedule.n_max, c.schedule.ratio);
  return merge(per_trial(c, seeds, workers, [&](std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    Rng rx = rng.split(0), ry = rng.split(1);
    auto x = sample_process(spec, sched.back(), rx);
    auto y = sample_process(spec, sched.back(), ry);
    auto profile = match_profile(x, y, sched, "trial " + std::to_string(t));
    auto es = exponent_series(profile);
    Table series{"lcs_series.csv", {"trial", "n", "log_n", "M_n"}, {}};
    for (std::size_t i = 0; i < sched.size(); ++i) {
      series.add({str(t), str(sched[i]), str(std::log(static_cast<double>(sched[i]))), str(profile.m_values[i])});
    }
    Table fits{"lcs_trials.csv", {"trial", "seed", "slope", "intercept", "residual", "n_points"}, {}};
    fits.add({str(t), str(seed, 0), str(es.fit.slope), str(es.fit.intercept), str(es.fit.residual),
              str(es.fit.n_points)});
    return Tables{series, fits};
  }));
}

Tables run_mindist(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const auto spec = resolved(c);
  const Schedule sched = geometric_schedule(c.schedule.n_min, c.schedule.n_max, c.schedule.ratio);
  return merge(per_trial(c, seeds, workers, [&](std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    Rng rx = rng.split(0), ry = rng.split(1);
    auto x = make_cloud(*c.map, spec, sched.back(), rx.seed(), rx);
    auto y = make_cloud(*c.map, spec, sched.back(), ry.seed(), ry);
    auto profile = mindist_fast(x, y, sched);
    auto es = exponent_series(profile);
    Table series{"mindist_series.csv", {"trial", "n", "m_n", "log_m_n", "exponent", "exact_zero"}, {}};
    for (std::size_t i = 0; i < sched.size(); ++i) {
      const double m = profile.m_values[i];
      series.add({str(t), str(sched[i]), str(m), str(m > 0 ? std::log(m) : std::nan("")),
                  str(profile.exponents[i]), flag(profile.exact_zero[i])});
    }
    Table fits{"mindist_trials.csv", {"trial", "seed", "slope", "intercept", "residual", "n_points", "retries"}, {}};
    fits.add({str(t), str(seed, 0), str(es.fit.slope), str(es.fit.intercept), str(es.fit.residual),
              str(es.fit.n_points), str(x.origin().retries + y.origin().retries)});
    return Tables{series, fits};
  }));
}

Tables run_dimension(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const auto spec = resolved(c);
  const unsigned inner = c.trials == 1 ? workers : 1;
  DimensionWindow window;
  window.min_pairs = c.analysis.min_pairs;
  window.max_fraction = c.analysis.max_fraction;
  return merge(per_trial(c, seeds, c.trials == 1 ? 1 : workers, [&](std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    Rng rx = rng.split(0);
    auto cloud = make_cloud(*c.map, spec, c.analysis.n_points, rx.seed(), rx);
    auto radii = c.analysis.radii.empty() ? default_radii(cloud) : c.analysis.radii;
    auto curve = correlation_sum(cloud, radii, CorrelationOptions{c.analysis.theiler, inner});
    auto fit = correlation_dimension(curve, window);
    Table series{"correlation_curve.csv", {"trial", "radius", "pairs", "c"}, {}};
    for (std::size_t i = 0; i < radii.size(); ++i) {
      series.add({str(t), str(radii[i]), str(curve.pair_counts[i], 0), str(curve.c_values[i])});
    }
    Table fits{"dimension_trials.csv",
               {"trial", "seed", "slope", "intercept", "r_lo", "r_hi", "n_points", "total_pairs"}, {}};
    fits.add({str(t), str(seed, 0), str(fit.slope), str(fit.intercept), str(fit.window_lo), str(fit.window_hi),
              str(fit.n_points), str(curve.total_pairs, 0)});
    return Tables{series, fits};
  }));
}

Tables run_entropy(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const ProcessSpec spec = *c.process;
  return merge(per_trial(c, seeds, workers, [&](std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    Rng rx = rng.split(0);
    auto seq = sample_process(spec, c.analysis.n_points, rx);
    Table series{"entropy_series.csv", {"trial", "k", "h2", "h2_plugin", "collisions"}, {}};
    Table fits{"entropy_trials.csv", {"trial", "seed", "k", "h2", "h2_plugin"}, {}};
    for (std::size_t k = 1; k <= c.analysis.k; ++k) {
      auto e = renyi_collision_estimate(seq, k);
      series.add({str(t), str(k), str(e.h2), str(*e.h2_plugin), str(*e.collisions, 0)});
      if (k == c.analysis.k) fits.add({str(t), str(seed, 0), str(k), str(e.h2), str(*e.h2_plugin)});
    }
    return Tables{series, fits};
  }));
}

Tables run_rotation(const ExperimentConfig& c, unsigned workers) {
  const Fixed128 theta = resolve_theta(*c.map);
  Rng master(c.seed);
  RotationOptions opt;
  opt.n_lo = c.schedule.n_min;
  opt.ratio = c.schedule.ratio;
  opt.workers = workers;
  auto rep = rotation_scaling(theta, c.schedule.n_max, c.trials, master, opt);

  Table series{"rotation_series.csv", {"trial", "probe", "n", "exponent"}, {}};
  Table trials{"rotation_trials.csv",
               {"trial", "delta", "excluded", "max_geometric", "min_probe", "min_all", "argmin_all"}, {}};
  for (std::size_t t = 0; t < rep.trials.size(); ++t) {
    const auto& tr = rep.trials[t];
    trials.add({str(t), format_theta_hex(tr.delta), flag(tr.excluded), str(tr.max_geometric), str(tr.min_probe),
                str(tr.min_all), str(tr.argmin_all)});
    if (tr.excluded) continue;
    for (std::size_t i = 0; i < tr.geometric_exponents.size(); ++i) {
      series.add({str(t), "geometric", str(rep.geometric[i]), str(tr.geometric_exponents[i])});
    }
    for (std::size_t i = 0; i < tr.probe_exponents.size(); ++i) {
      series.add({str(t), "convergent", str(rep.probes[i]), str(tr.probe_exponents[i])});
    }
  }
  Table cf{"rotation_cf.csv", {"k", "a", "q", "log_ratio"}, {}};
  for (std::size_t k = 0; k < rep.cf.q.size(); ++k) {
    std::string ratio;
    if (k + 1 < rep.cf.q.size() && rep.cf.q[k] > 1) {
      ratio = str(std::log(static_cast<double>(rep.cf.q[k + 1])) / std::log(static_cast<double>(rep.cf.q[k])));
    }
    cf.add({str(k), rep.cf.a[k].str(), rep.cf.q[k].str(), ratio});
  }
  return Tables{series, trials, cf};
}

Tables run_bridge(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const ProcessSpec spec = *c.process;
  const std::size_t n_top = *std::max_element(c.analysis.n_values.begin(), c.analysis.n_values.end());
  return merge(per_trial(c, seeds, workers, [&](std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    Rng rx = rng.split(0), ry = rng.split(1);
    auto x = sample_process(spec, 2 * n_top, rx);
    auto y = sample_process(spec, 2 * n_top, ry);
    Table series{"bridge_series.csv",
                 {"trial", "n", "M_n", "neglog_m_n", "M_2n", "applies", "holds", "holds_strict"}, {}};
    for (auto n : c.analysis.n_values) {
      auto r = bridge_check(x, y, n);
      series.add({str(t), str(n), str(r.m_n), str(r.neglog_min), str(r.m_2n), flag(r.applies), flag(r.holds),
                  flag(r.holds_strict)});
    }
    return Tables{series};
  }));
}

Tables run_duality(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const auto spec = resolved(c);
  const std::size_t n_top = *std::max_element(c.analysis.n_values.begin(), c.analysis.n_values.end());
  const double r = c.analysis.radius;
  return merge(per_trial(c, seeds, workers, [&](std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    Rng rx = rng.split(0), ry = rng.split(1);
    auto x = make_cloud(*c.map, spec, n_top, rx.seed(), rx);
    auto y = make_cloud(*c.map, spec, n_top, ry.seed(), ry);
    Table series{"duality_series.csv",
                 {"trial", "n", "r", "mindist", "wait_forward", "wait_backward", "forward_applies", "forward_holds",
                  "converse_applies", "converse_holds"},
                 {}};
    auto wait = [](const std::optional<std::size_t>& w) { return w ? str(*w) : std::string("inf"); };
    for (auto n : c.analysis.n_values) {
      auto d = check_duality(x, y, n, r);
      series.add({str(t), str(n), str(r), str(d.mindist), wait(d.wait_forward), wait(d.wait_backward),
                  flag(d.forward_applies), flag(d.forward_holds), flag(d.converse_applies),
                  flag(d.converse_holds)});
    }
    return Tables{series};
  }));
}

std::vector<double> moment_radii(const ExperimentConfig& c) {
  if (!c.analysis.radii.empty()) return c.analysis.radii;
  std::vector<double> radii;
  for (int j = 0; j <= 13; ++j) radii.push_back(0.1 * std::pow(2.0, -0.5 * j));
  return radii;
}

Tables run_moments(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const auto spec = resolved(c);
  const auto radii = moment_radii(c);
  return merge(per_trial(c, seeds, workers, [&](std::size_t t, std::uint64_t seed) {
    Rng rng(seed);
    Rng rx = rng.split(0);
    auto cloud = make_cloud(*c.map, spec, c.analysis.n_points, rx.seed(), rx);
    auto sweep = ball_moment_sweep(cloud, radii);
    Table series{"moments_series.csv", {"trial", "r", "first", "second", "ratio", "cauchy_schwarz"}, {}};
    for (const auto& rep : sweep.reports) {
      series.add({str(t), str(rep.r), str(rep.first), str(rep.second), str(rep.ratio), flag(rep.cauchy_schwarz)});
    }
    return Tables{series};
  }));
}

// ---------------------------------------------------------------------------
// Plot data

struct FitLine {
  double slope = 0, intercept = 0;
};

std::map<std::string, FitLine> read_fits(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing fit file " + path.string());
  auto t = read_csv(path);
  const auto ct = t.column("trial"), cs = t.column("slope"), ci = t.column("intercept");
  std::map<std::string, FitLine> out;
  for (const auto& r : t.rows) out[r.at(ct)] = {cell_real(r.at(cs)), cell_real(r.at(ci))};
  return out;
}

// Rows grouped by trial, blank line between groups.
template <typename RowFn>
std::string plot_blocks(const CsvTable& t, const std::string& header, RowFn&& fn) {
  std::string out = "# " + header + "\n";
  const auto ct = t.column("trial");
  std::string current;
  bool first = true;
  for (const auto& r : t.rows) {
    if (!first && r.at(ct) != current) out += "\n";
    first = false;
    current = r.at(ct);
    out += fn(r);
  }
  return out;
}

std::string columns(std::initializer_list<double> vals) {
  std::string out;
  bool first = true;
  for (double v : vals) {
    if (!first) out += ' ';
    first = false;
    out += format_real(v);
  }
  return out + "\n";
}

}  // namespace

// ---------------------------------------------------------------------------

bool ExperimentResult::passed() const {
  return std::none_of(summary.begin(), summary.end(), [](const SummaryRow& r) { return r.verdict == "fail"; });
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw IoError("csv column '" + std::string(name) + "' not found");
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  auto cells = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv " + path.string());
  t.header = cells(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = cells(line);
    row.resize(t.header.size());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

fs::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (!config.output.empty()) return config.output;
  const char* env = std::getenv("ORBITMATCH_OUT");
  fs::path base = env && *env ? fs::path(env) : fs::path("out");
  return base / std::string(kind_name(config.kind));
}

std::vector<SummaryRow> summarize(const ExperimentConfig& c, const fs::path& dir) {
  std::vector<SummaryRow> rows;
  const auto& tol = c.tolerance;
  switch (c.kind) {
    case ExperimentKind::Lcs: {
      auto slopes = column_reals(read_csv(dir / "lcs_trials.csv"), "slope");
      const double fitted = median(slopes);
      if (auto h2 = exact_h2(*c.process)) {
        const double rel = std::holds_alternative<MarkovSource>(*c.process) ? 0.20 : 0.15;
        rows.push_back(reported(c, "h2_exact", h2->h2));
        rows.push_back(judged(c, "slope_M_n_vs_log_n", band(tol, 2.0 / h2->h2, 1 - rel, 1 + rel), fitted));
      } else {
        // no closed-form entropy: report the empirical bracket only
        rows.push_back(reported(c, "slope_min", *std::min_element(slopes.begin(), slopes.end())));
        rows.push_back(reported(c, "slope_median", fitted));
        rows.push_back(reported(c, "slope_max", *std::max_element(slopes.begin(), slopes.end())));
      }
      break;
    }
    case ExperimentKind::MinDist: {
      auto trials = read_csv(dir / "mindist_trials.csv");
      const double fitted = median(column_reals(trials, "slope"));
      if (c.map->type == "rotation") {
        rows.push_back(reported(c, "slope_log_m_n_vs_neg_log_n", fitted, 1.0));
      } else {
        const double target = 2.0 / cloud_dimension(*c.map);
        double lo = 0.8, hi = 1.2;
        if (c.map->type == "gauss") lo = 0.75, hi = 1.25;
        if (c.map->type == "product") hi = 1.25;
        rows.push_back(judged(c, "slope_log_m_n_vs_neg_log_n", band(tol, target, lo, hi), fitted));
      }
      double retries = 0;
      for (double v : column_reals(trials, "retries")) retries += v;
      rows.push_back(reported(c, "resampled_initial_points", retries));
      break;
    }
    case ExperimentKind::Dimension: {
      const double fitted = median(column_reals(read_csv(dir / "dimension_trials.csv"), "slope"));
      const double target = cloud_dimension(*c.map);
      const double rel = target == 1.0 ? 0.10 : 0.075;
      rows.push_back(judged(c, "correlation_dimension", band(tol, target, 1 - rel, 1 + rel), fitted));
      break;
    }
    case ExperimentKind::Entropy: {
      const double fitted = median(column_reals(read_csv(dir / "entropy_trials.csv"), "h2"));
      if (auto h2 = exact_h2(*c.process)) {
        const double rel = std::holds_alternative<MarkovSource>(*c.process) ? 0.07 : 0.05;
        rows.push_back(judged(c, "h2_collision_k" + std::to_string(c.analysis.k), band(tol, h2->h2, 1 - rel, 1 + rel),
                              fitted));
      } else {
        rows.push_back(reported(c, "h2_collision_k" + std::to_string(c.analysis.k), fitted));
      }
      break;
    }
    case ExperimentKind::Rotation: {
      auto trials = read_csv(dir / "rotation_trials.csv");
      const auto ce = trials.column("excluded");
      std::vector<double> maxes, mins, mins_all;
      const auto cmax = trials.column("max_geometric"), cmin = trials.column("min_probe"),
                 call = trials.column("min_all");
      std::size_t excluded = 0;
      for (const auto& r : trials.rows) {
        if (r.at(ce) == "1") {
          ++excluded;
          continue;
        }
        maxes.push_back(cell_real(r.at(cmax)));
        if (double v = cell_real(r.at(cmin)); !std::isnan(v)) mins.push_back(v);
        mins_all.push_back(cell_real(r.at(call)));
      }
      const double eta = rotation_eta(*c.map);
      Band liminf{1.0 / eta, {}, {}}, limsup{1.0, {}, {}};
      if (eta == 1.0) {
        liminf.lo = limsup.lo = tol.lo.value_or(0.8);
        liminf.hi = limsup.hi = tol.hi.value_or(1.2);
      } else {
        liminf.hi = tol.liminf_max.value_or(0.65);
        limsup.lo = tol.limsup_min.value_or(0.85);
      }
      rows.push_back(reported(c, "eta", eta));
      rows.push_back(judged(c, "liminf_exponent_convergents", liminf, median(mins)));
      rows.push_back(judged(c, "limsup_exponent_geometric", limsup, median(maxes)));
      rows.push_back(reported(c, "min_exponent_all_n", median(mins_all), 1.0 / eta));
      rows.push_back(reported(c, "excluded_trials", static_cast<double>(excluded)));
      break;
    }
    case ExperimentKind::Bridge: {
      auto t = read_csv(dir / "bridge_series.csv");
      rows.push_back(reported(c, "applicable", static_cast<double>(count_true(t, "applies"))));
      rows.push_back(zero_failures(c, "sandwich_failures", count_rows(t, "applies", "holds")));
      rows.push_back(reported(c, "strict_sandwich_failures", static_cast<double>(count_rows(t, "applies", "holds_strict"))));
      break;
    }
    case ExperimentKind::Duality: {
      auto t = read_csv(dir / "duality_series.csv");
      rows.push_back(reported(c, "forward_applicable", static_cast<double>(count_true(t, "forward_applies"))));
      rows.push_back(reported(c, "converse_applicable", static_cast<double>(count_true(t, "converse_applies"))));
      rows.push_back(zero_failures(c, "duality_failures", count_rows(t, "forward_applies", "forward_holds") +
                                                               count_rows(t, "converse_applies", "converse_holds")));
      break;
    }
    case ExperimentKind::Moments: {
      auto t = read_csv(dir / "moments_series.csv");
      auto ratios = column_reals(t, "ratio");
      rows.push_back(reported(c, "empirical_K", *std::max_element(ratios.begin(), ratios.end())));
      rows.push_back(zero_failures(c, "cauchy_schwarz_failures", t.rows.size() - count_true(t, "cauchy_schwarz")));
      break;
    }
  }
  return rows;
}

std::vector<fs::path> emit_plot_data(const fs::path& dir) {
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(dir / name);
  };
  if (fs::exists(dir / "lcs_series.csv")) {
    auto fits = read_fits(dir / "lcs_trials.csv");
    auto t = read_csv(dir / "lcs_series.csv");
    const auto ct = t.column("trial"), cx = t.column("log_n"), cy = t.column("M_n");
    emit("lcs.plot.dat", plot_blocks(t, "log_n M_n fit", [&](const auto& r) {
           const double x = cell_real(r.at(cx));
           const auto& f = fits.at(r.at(ct));
           return columns({x, cell_real(r.at(cy)), f.slope * x + f.intercept});
         }));
  }
  if (fs::exists(dir / "mindist_series.csv")) {
    auto fits = read_fits(dir / "mindist_trials.csv");
    auto t = read_csv(dir / "mindist_series.csv");
    const auto ct = t.column("trial"), cn = t.column("n"), cy = t.column("log_m_n"), cz = t.column("exact_zero");
    emit("mindist.plot.dat", plot_blocks(t, "neg_log_n log_m_n fit", [&](const auto& r) -> std::string {
           if (r.at(cz) == "1") return {};
           const double x = -std::log(cell_real(r.at(cn)));
           const auto& f = fits.at(r.at(ct));
           return columns({x, cell_real(r.at(cy)), f.slope * x + f.intercept});
         }));
  }
  if (fs::exists(dir / "correlation_curve.csv")) {
    auto fits = read_fits(dir / "dimension_trials.csv");
    auto t = read_csv(dir / "correlation_curve.csv");
    const auto ct = t.column("trial"), cr = t.column("radius"), cc = t.column("c");
    emit("dimension.plot.dat", plot_blocks(t, "log_r log_c fit", [&](const auto& r) -> std::string {
           const double c = cell_real(r.at(cc));
           if (!(c > 0)) return {};
           const double x = std::log(cell_real(r.at(cr)));
           const auto& f = fits.at(r.at(ct));
           return columns({x, std::log(c), f.slope * x + f.intercept});
         }));
  }
  if (fs::exists(dir / "entropy_series.csv")) {
    auto t = read_csv(dir / "entropy_series.csv");
    const auto ck = t.column("k"), ch = t.column("h2"), cp = t.column("h2_plugin");
    emit("entropy.plot.dat", plot_blocks(t, "k h2 h2_plugin", [&](const auto& r) {
           return columns({cell_real(r.at(ck)), cell_real(r.at(ch)), cell_real(r.at(cp))});
         }));
  }
  if (fs::exists(dir / "rotation_series.csv")) {
    auto t = read_csv(dir / "rotation_series.csv");
    const auto cp = t.column("probe"), cn = t.column("n"), ce = t.column("exponent");
    emit("rotation.plot.dat", plot_blocks(t, "log_n exponent convergent_probe", [&](const auto& r) {
           return columns({std::log(cell_real(r.at(cn))), cell_real(r.at(ce)), r.at(cp) == "convergent" ? 1.0 : 0.0});
         }));
  }
  if (fs::exists(dir / "moments_series.csv")) {
    auto t = read_csv(dir / "moments_series.csv");
    const auto cr = t.column("r"), cf = t.column("first"), cs = t.column("second");
    emit("moments.plot.dat", plot_blocks(t, "log_r log_first log_second", [&](const auto& r) {
           return columns({std::log(cell_real(r.at(cr))), std::log(cell_real(r.at(cf))), std::log(cell_real(r.at(cs)))});
         }));
  }
  if (written.empty()) {
    if (fs::exists(dir / "bridge_series.csv") || fs::exists(dir / "duality_series.csv")) return written;
    throw IoError("no series files found in " + dir.string());
  }
  return written;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate_config(config);
  const auto started = std::chrono::steady_clock::now();
  const unsigned workers = std::max(1u, options.workers);

  std::vector<std::uint64_t> seeds(config.trials);
  for (std::size_t t = 0; t < config.trials; ++t) seeds[t] = Rng::stream_seed(config.seed, t);

  Tables tables;
  switch (config.kind) {
    case ExperimentKind::Lcs: tables = run_lcs(config, seeds, workers); break;
    case ExperimentKind::MinDist: tables = run_mindist(config, seeds, workers); break;
    case ExperimentKind::Dimension: tables = run_dimension(config, seeds, workers); break;
    case ExperimentKind::Entropy: tables = run_entropy(config, seeds, workers); break;
    case ExperimentKind::Rotation: tables = run_rotation(config, workers); break;
    case ExperimentKind::Bridge: tables = run_bridge(config, seeds, workers); break;
    case ExperimentKind::Duality: tables = run_duality(config, seeds, workers); break;
    case ExperimentKind::Moments: tables = run_moments(config, seeds, workers); break;
  }

  ExperimentResult result;
  result.out_dir = resolve_output_dir(config, options);
  std::error_code ec;
  fs::create_directories(result.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + result.out_dir.string() + ": " + ec.message());

  const std::string config_text = serialize_config(config);
  write_file(result.out_dir / "config.ini", config_text);
  std::vector<std::string> names;
  for (const auto& t : tables) {
    write_file(result.out_dir / t.name, t.text());
    names.push_back(t.name);
  }
  for (const auto& p : emit_plot_data(result.out_dir)) names.push_back(p.filename().string());

  result.summary = summarize(config, result.out_dir);
  Table summary{"summary.csv", {"kind", "quantity", "target", "fitted", "lo", "hi", "verdict"}, {}};
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const auto& r : result.summary) {
    summary.add({r.kind, r.quantity, opt(r.target), format_real(r.fitted), opt(r.lo), opt(r.hi), r.verdict});
  }
  write_file(result.out_dir / summary.name, summary.text());
  names.push_back(summary.name);

  RunManifest& m = result.manifest;
  m.kind = std::string(kind_name(config.kind));
  m.config_hash = sha256_hex(config_text);
  m.seed = config.seed;
  m.trial_seeds = seeds;
  for (const auto& name : names) m.files.emplace_back(name, sha256_file(result.out_dir / name));
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(result.out_dir / "manifest.txt", m);
  return result;
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  std::ostringstream os;
  os << "[manifest]\n";
  os << "version = " << m.version << "\n";
  os << "kind = " << m.kind << "\n";
  os << "config = config.ini\n";
  os << "config_hash = " << m.config_hash << "\n";
  os << "seed = " << m.seed << "\n";
  os << "wall_clock_seconds = " << format_real(m.wall_clock_seconds) << "\n";
  os << "\n[trial_seeds]\n";
  for (std::size_t t = 0; t < m.trial_seeds.size(); ++t) os << t << " = " << m.trial_seeds[t] << "\n";
  os << "\n[files]\n";
  for (const auto& [name, sum] : m.files) os << name << " = " << sum << "\n";
  write_file(path, os.str());
}

RunManifest read_manifest(const fs::path& path) {
  std::istringstream in(read_file(path));
  RunManifest m;
  m.version.clear();
  std::string section, line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      section = line.substr(1, line.find(']') - 1);
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IoError("malformed manifest line: " + line);
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    if (section == "manifest") {
      if (key == "version") m.version = value;
      else if (key == "kind") m.kind = value;
      else if (key == "config_hash") m.config_hash = value;
      else if (key == "seed") m.seed = std::stoull(value);
      else if (key == "wall_clock_seconds") m.wall_clock_seconds = cell_real(value);
    } else if (section == "trial_seeds") {
      m.trial_seeds.push_back(std::stoull(value));
    } else if (section == "files") {
      m.files.emplace_back(key, value);
    }
  }
  if (m.config_hash.empty()) throw IoError("manifest has no config hash: " + path.string());
  return m;
}

ExperimentResult rerun_from_manifest(const fs::path& manifest_path, const fs::path& out_dir, unsigned workers) {
  const RunManifest m = read_manifest(manifest_path);
  const fs::path config_path = manifest_path.parent_path() / "config.ini";
  const std::string text = read_file(config_path);
  if (sha256_hex(text) != m.config_hash) throw ConfigError("config.ini does not match the manifest hash");
  ExperimentConfig config = parse_config(text);
  return run_experiment(config, RunOptions{out_dir, workers});
}

std::vector<std::string> verify_checksums(const RunManifest& manifest, const fs::path& dir) {
  std::vector<std::string> bad;
  for (const auto& [name, sum] : manifest.files) {
    if (!fs::exists(dir / name) || sha256_file(dir / name) != sum) bad.push_back(name);
  }
  return bad;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericDegeneracy*>(&e)) return 3;
  return 1;
}

std::string error_record_json(const std::exception& e) {
  std::string type = "Error";
  if (dynamic_cast<const ConfigError*>(&e)) type = "ConfigError";
  else if (dynamic_cast<const FitError*>(&e)) type = "FitError";
  else if (dynamic_cast<const NumericDegeneracy*>(&e)) type = "NumericDegeneracy";
  else if (dynamic_cast<const ConvergenceError*>(&e)) type = "ConvergenceError";
  else if (dynamic_cast<const InvalidArgument*>(&e)) type = "InvalidArgument";
  else if (dynamic_cast<const IoError*>(&e)) type = "IoError";
  else if (dynamic_cast<const AlphabetMismatch*>(&e)) type = "AlphabetMismatch";
  else if (dynamic_cast<const DimensionMismatch*>(&e)) type = "DimensionMismatch";
  else if (dynamic_cast<const MetricMismatch*>(&e)) type = "MetricMismatch";
  nlohmann::json j;
  j["error"] = type;
  j["message"] = e.what();
  j["exit_code"] = exit_code_for(e);
  if (auto* f = dynamic_cast<const FitError*>(&e)) j["usable_points"] = f->usable();
  return j.dump();
}

}  // namespace orbitmatch
