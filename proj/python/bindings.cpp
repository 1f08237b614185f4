#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "orbitmatch/config.hpp"
#include "orbitmatch/error.hpp"
#include "orbitmatch/estimators.hpp"
#include "orbitmatch/harness.hpp"
#include "orbitmatch/matching.hpp"
#include "orbitmatch/mindist.hpp"
#include "orbitmatch/orbits.hpp"
#include "orbitmatch/processes.hpp"
#include "orbitmatch/rotation.hpp"

namespace py = pybind11;
using namespace orbitmatch;

namespace {

SymbolicSequence to_sequence(const std::vector<std::uint32_t>& symbols, std::uint32_t alphabet) {
  if (alphabet == 0) {
    for (auto s : symbols) alphabet = std::max(alphabet, s + 1);
    alphabet = std::max<std::uint32_t>(alphabet, 1);
  }
  return SymbolicSequence(alphabet, symbols);
}

std::vector<std::uint32_t> to_list(const SymbolicSequence& s) { return {s.symbols().begin(), s.symbols().end()}; }

OrbitCloud cloud_from_lists(const std::vector<std::vector<double>>& points, const std::string& metric) {
  std::vector<TorusPoint> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    TorusPoint tp;
    for (double v : p) tp.coords.push_back(real_to_fixed(v));
    pts.push_back(std::move(tp));
  }
  return OrbitCloud::from_points(pts, parse_metric(metric));
}

std::vector<std::vector<double>> cloud_to_lists(const OrbitCloud& c) {
  std::vector<std::vector<double>> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (auto v : c.point(i)) out[i].push_back(fixed_to_real(v));
  }
  return out;
}

py::dict fit_dict(const SlopeFit& f) {
  py::dict d;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["residual"] = f.residual;
  d["n_points"] = f.n_points;
  d["window_lo"] = f.window_lo;
  d["window_hi"] = f.window_hi;
  return d;
}

std::vector<std::string> big_strings(const std::vector<BigInt>& v) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(x.str());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "orbitmatch native core";
  m.attr("__version__") = std::string(kVersion);

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<AlphabetMismatch>(m, "AlphabetMismatch", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<MetricMismatch>(m, "MetricMismatch", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  auto degeneracy = py::register_exception<NumericDegeneracy>(m, "NumericDegeneracy", base.ptr());
  py::register_exception<FitError>(m, "FitError", degeneracy.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // sequences and matching
  m.def(
      "lcs",
      [](const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y, std::size_t n,
         std::uint32_t alphabet, bool naive) {
        auto a = to_sequence(x, alphabet), b = to_sequence(y, alphabet ? alphabet : a.alphabet_size());
        if (a.alphabet_size() != b.alphabet_size()) {
          const auto k = std::max(a.alphabet_size(), b.alphabet_size());
          a = to_sequence(x, k);
          b = to_sequence(y, k);
        }
        return naive ? lcs_naive(a, b, n) : lcs_fast(a, b, n);
      },
      py::arg("x"), py::arg("y"), py::arg("n"), py::arg("alphabet") = 0, py::arg("naive") = false,
      "Longest common substring of the length-n prefixes.");
  m.def(
      "lcs_text",
      [](const std::string& x, const std::string& y, const std::string& alphabet, std::size_t n, bool naive) {
        auto a = SymbolicSequence::from_string(x, alphabet), b = SymbolicSequence::from_string(y, alphabet);
        return naive ? lcs_naive(a, b, n) : lcs_fast(a, b, n);
      },
      py::arg("x"), py::arg("y"), py::arg("alphabet"), py::arg("n"), py::arg("naive") = false);

  m.def(
      "sample_iid",
      [](const std::vector<double>& probs, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return to_list(sample_process(IidSource{probs}, n, rng));
      },
      py::arg("probs"), py::arg("n"), py::arg("seed") = 0);
  m.def(
      "sample_markov",
      [](const std::vector<std::vector<double>>& p, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return to_list(sample_process(MarkovSource{Matrix::from_rows(p), std::nullopt, 0}, n, rng));
      },
      py::arg("transition"), py::arg("n"), py::arg("seed") = 0);
  m.def("h2_iid", [](const std::vector<double>& p) { return exact_h2_iid(p).h2; }, py::arg("probs"));
  m.def(
      "h2_markov", [](const std::vector<std::vector<double>>& p) { return exact_h2_markov(Matrix::from_rows(p)).h2; },
      py::arg("transition"));
  m.def(
      "stationary_distribution",
      [](const std::vector<std::vector<double>>& p) { return stationary_distribution(Matrix::from_rows(p)); },
      py::arg("transition"));
  m.def(
      "collision_entropy",
      [](const std::vector<std::uint32_t>& seq, std::size_t k, std::uint32_t alphabet) {
        auto e = renyi_collision_estimate(to_sequence(seq, alphabet), k);
        py::dict d;
        d["h2"] = e.h2;
        d["h2_plugin"] = *e.h2_plugin;
        d["collisions"] = *e.collisions;
        return d;
      },
      py::arg("sequence"), py::arg("k"), py::arg("alphabet") = 0);

  // orbits and distances
  m.def(
      "orbit",
      [](const std::string& map, std::size_t n, std::uint64_t seed, std::uint32_t m_param, double beta,
         std::vector<std::uint32_t> factors, const std::string& theta, const std::string& metric) {
        MapConfig mc;
        mc.type = map;
        mc.m = m_param;
        mc.beta = beta;
        mc.factors = std::move(factors);
        mc.theta = theta;
        mc.metric = parse_metric(metric);
        OrbitGenConfig g;
        g.n = n;
        g.seed = seed;
        g.metric = mc.metric;
        return cloud_to_lists(generate_orbit(resolve_map(mc), g));
      },
      py::arg("map"), py::arg("n"), py::arg("seed") = 0, py::arg("m") = 2, py::arg("beta") = 1.5,
      py::arg("factors") = std::vector<std::uint32_t>{}, py::arg("theta") = "golden",
      py::arg("metric") = "max", "Orbit points as lists of coordinates in [0,1).");
  m.def(
      "mindist",
      [](const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y, std::size_t n,
         const std::string& metric, bool naive) {
        auto a = cloud_from_lists(x, metric), b = cloud_from_lists(y, metric);
        if (naive) return mindist_naive(a, b, n);
        return mindist_fast(a, b, Schedule({n})).m_values.back();
      },
      py::arg("x"), py::arg("y"), py::arg("n"), py::arg("metric") = "max", py::arg("naive") = false);
  m.def(
      "correlation_sum",
      [](const std::vector<std::vector<double>>& pts, const std::vector<double>& radii, const std::string& metric,
         std::size_t theiler) {
        auto curve = correlation_sum(cloud_from_lists(pts, metric), radii, CorrelationOptions{theiler, 1});
        py::dict d;
        d["radii"] = curve.radii;
        d["c"] = curve.c_values;
        d["pairs"] = curve.pair_counts;
        d["total_pairs"] = curve.total_pairs;
        return d;
      },
      py::arg("points"), py::arg("radii"), py::arg("metric") = "max", py::arg("theiler") = 0);
  m.def(
      "correlation_dimension",
      [](const std::vector<std::vector<double>>& pts, const std::string& metric) {
        auto cloud = cloud_from_lists(pts, metric);
        return fit_dict(correlation_dimension(correlation_sum(cloud, default_radii(cloud))));
      },
      py::arg("points"), py::arg("metric") = "max");

  // rotations
  m.def("golden_theta", [] { return format_theta_hex(golden_theta()); });
  m.def("sqrt2_theta", [] { return format_theta_hex(sqrt2_theta()); });
  m.def(
      "designed_theta", [](double eta) { return format_theta_hex(design_theta(eta, 200).theta); },
      py::arg("eta"));
  m.def(
      "continued_fraction",
      [](const std::string& theta, std::size_t k_max) {
        auto cf = cf_expand(parse_theta_hex(theta), k_max);
        py::dict d;
        d["a"] = big_strings(cf.a);
        d["p"] = big_strings(cf.p);
        d["q"] = big_strings(cf.q);
        d["terminated"] = cf.terminated;
        return d;
      },
      py::arg("theta"), py::arg("k_max") = 256);
  m.def(
      "eta_estimate", [](const std::string& theta) { return eta_estimate(cf_expand(parse_theta_hex(theta), 256)).eta; },
      py::arg("theta"));
  m.def(
      "rotation_mindist",
      [](const std::string& theta, const std::string& delta, std::size_t n) {
        return rotation_mindist_exact(parse_theta_hex(theta), parse_theta_hex(delta), n);
      },
      py::arg("theta"), py::arg("delta"), py::arg("n"));

  // experiments
  m.def(
      "default_config", [](const std::string& kind) { return serialize_config(default_config(parse_kind(kind))); },
      py::arg("kind"), "Canonical config text for a kind's built-in configuration.");
  m.def(
      "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("text"));
  m.def(
      "run_experiment",
      [](const std::string& text, const std::string& out_dir, unsigned workers) {
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(parse_config(text), RunOptions{out_dir, workers});
        }
        py::list rows;
        for (const auto& s : r.summary) {
          py::dict d;
          d["kind"] = s.kind;
          d["quantity"] = s.quantity;
          d["target"] = s.target;
          d["fitted"] = s.fitted;
          d["lo"] = s.lo;
          d["hi"] = s.hi;
          d["verdict"] = s.verdict;
          rows.append(d);
        }
        py::dict out;
        out["out_dir"] = r.out_dir.string();
        out["summary"] = rows;
        out["passed"] = r.passed();
        out["config_hash"] = r.manifest.config_hash;
        return out;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("workers") = 1);
  m.def("sha256_file", [](const std::string& path) { return sha256_file(path); }, py::arg("path"));
}
