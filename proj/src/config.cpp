#include "orbitmatch/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "orbitmatch/error.hpp"
#include "orbitmatch/rotation.hpp"

namespace orbitmatch {

namespace {

constexpr std::string_view kKindNames[] = {"lcs", "mindist", "dimension", "entropy",
                                           "rotation", "bridge", "duality", "moments"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

// section -> key -> entry
class Document {
 public:
  Document(std::string_view text) {
    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      auto line = trim(raw);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (!known_sections().contains(section)) fail(line_no, "unknown section [" + section + "]");
        if (!sections_.emplace(section, std::map<std::string, Entry>{}).second) {
          fail(line_no, "duplicate section [" + section + "]");
        }
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "expected key = value");
      if (section.empty()) fail(line_no, "key outside of any section");
      std::string key(trim(line.substr(0, eq)));
      if (key.empty()) fail(line_no, "empty key");
      auto& keys = sections_[section];
      if (keys.contains(key)) fail(line_no, "duplicate key '" + key + "'");
      keys[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no, false};
    }
  }

  bool has_section(const std::string& s) const { return sections_.contains(s); }

  const Entry* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  void check_all_used() const {
    for (const auto& [section, keys] : sections_) {
      for (const auto& [key, entry] : keys) {
        if (!entry.used) fail(entry.line, "key '" + key + "' is not used in [" + section + "]");
      }
    }
  }

  [[noreturn]] static void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  }

 private:
  static const std::set<std::string>& known_sections() {
    static const std::set<std::string> s{"experiment", "process", "map", "schedule", "analysis", "tolerance"};
    return s;
  }
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

template <typename T>
T parse_number(std::string_view text, int line) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    Document::fail(line, "cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

double parse_real(std::string_view text, int line) {
  double v = parse_number<double>(text, line);
  if (!std::isfinite(v)) Document::fail(line, "number must be finite");
  return v;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, int line) {
  std::vector<T> out;
  for (auto w : words(text)) {
    if constexpr (std::is_floating_point_v<T>) out.push_back(parse_real(w, line));
    else out.push_back(parse_number<T>(w, line));
  }
  return out;
}

// Typed getters that leave the target untouched when the key is absent.
struct Reader {
  Document& doc;
  std::string section;

  const Entry* get(const char* key) { return doc.find(section, key); }
  template <typename T>
  bool number(const char* key, T& out) {
    auto* e = get(key);
    if (!e) return false;
    if constexpr (std::is_floating_point_v<T>) out = parse_real(e->value, e->line);
    else out = parse_number<T>(e->value, e->line);
    return true;
  }
  template <typename T>
  bool number(const char* key, std::optional<T>& out) {
    T v{};
    if (!number(key, v)) return false;
    out = v;
    return true;
  }
  template <typename T>
  bool list(const char* key, std::vector<T>& out) {
    auto* e = get(key);
    if (!e) return false;
    out = parse_list<T>(e->value, e->line);
    return true;
  }
  bool text(const char* key, std::string& out) {
    auto* e = get(key);
    if (!e) return false;
    out = e->value;
    return true;
  }
  const Entry& required(const char* key) {
    auto* e = get(key);
    if (!e) throw ConfigError("missing key '" + std::string(key) + "' in [" + section + "]");
    return *e;
  }
};

ProcessSpec read_process(Document& doc) {
  Reader r{doc, "process"};
  const std::string type = r.required("type").value;
  if (type == "iid") {
    IidSource s;
    const auto& e = r.required("probs");
    s.probs = parse_list<double>(e.value, e.line);
    return s;
  }
  if (type == "markov") {
    MarkovSource s;
    const auto& e = r.required("transition");
    std::vector<std::vector<double>> rows;
    for (auto row : split(e.value, ';')) rows.push_back(parse_list<double>(row, e.line));
    try {
      s.transition = Matrix::from_rows(rows);
    } catch (const Error& err) {
      Document::fail(e.line, err.what());
    }
    std::vector<double> init;
    if (r.list("initial", init)) s.initial = init;
    r.number("burn_in", s.burn_in);
    return s;
  }
  if (type == "renewal") {
    BinaryRenewalSource s;
    r.list("q", s.q);
    r.number("tail", s.tail_value);
    return s;
  }
  throw ConfigError("unknown process type '" + type + "'");
}

MapConfig read_map(Document& doc) {
  Reader r{doc, "map"};
  MapConfig m;
  m.type = r.required("type").value;
  if (m.type == "expanding") {
    r.number("m", m.m);
  } else if (m.type == "beta") {
    r.number("beta", m.beta);
  } else if (m.type == "rotation") {
    r.text("theta", m.theta);
    if (m.theta == "designed") r.number("eta_target", m.eta_target);
  } else if (m.type == "product") {
    const auto& e = r.required("factors");
    m.factors = parse_list<std::uint32_t>(e.value, e.line);
  } else if (m.type == "uniform") {
    r.number("dim", m.dim);
  } else if (m.type != "ladder" && m.type != "gauss") {
    throw ConfigError("unknown map type '" + m.type + "'");
  }
  if (auto* e = r.get("metric")) {
    try {
      m.metric = parse_metric(e->value);
    } catch (const Error& err) {
      Document::fail(e->line, err.what());
    }
  }
  r.number("digit_depth", m.digit_depth);
  r.number("burn_in", m.burn_in);
  return m;
}

void write_list(std::ostream& os, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_real(v[i]);
}

template <typename T>
void write_ints(std::ostream& os, const std::vector<T>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

ExperimentKind parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<ExperimentKind>(i);
  }
  if (name == "dim") return ExperimentKind::Dimension;
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig parse_config(std::string_view text) {
  Document doc(text);
  Reader ex{doc, "experiment"};
  ExperimentConfig c;
  c.kind = parse_kind(ex.required("kind").value);
  ex.number("seed", c.seed);
  ex.number("trials", c.trials);
  ex.text("output", c.output);
  if (doc.has_section("process")) c.process = read_process(doc);
  if (doc.has_section("map")) c.map = read_map(doc);

  Reader sc{doc, "schedule"};
  sc.number("n_min", c.schedule.n_min);
  sc.number("n_max", c.schedule.n_max);
  sc.number("ratio", c.schedule.ratio);

  Reader an{doc, "analysis"};
  an.number("k", c.analysis.k);
  an.number("n_points", c.analysis.n_points);
  an.list("radii", c.analysis.radii);
  an.number("theiler", c.analysis.theiler);
  an.number("min_pairs", c.analysis.min_pairs);
  an.number("max_fraction", c.analysis.max_fraction);
  an.list("n_values", c.analysis.n_values);
  an.number("radius", c.analysis.radius);

  Reader tol{doc, "tolerance"};
  tol.number("rel", c.tolerance.rel);
  tol.number("lo", c.tolerance.lo);
  tol.number("hi", c.tolerance.hi);
  tol.number("liminf_max", c.tolerance.liminf_max);
  tol.number("limsup_min", c.tolerance.limsup_min);

  doc.check_all_used();
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "kind = " << kind_name(c.kind) << "\n";
  os << "seed = " << c.seed << "\n";
  os << "trials = " << c.trials << "\n";
  if (!c.output.empty()) os << "output = " << c.output << "\n";

  if (c.process) {
    os << "\n[process]\n";
    std::visit(
        [&os](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, IidSource>) {
            os << "type = iid\nprobs = ";
            write_list(os, s.probs);
            os << "\n";
          } else if constexpr (std::is_same_v<T, MarkovSource>) {
            os << "type = markov\ntransition = ";
            auto rows = s.transition.rows();
            for (std::size_t i = 0; i < rows.size(); ++i) {
              os << (i ? "; " : "");
              write_list(os, rows[i]);
            }
            os << "\n";
            if (s.initial) {
              os << "initial = ";
              write_list(os, *s.initial);
              os << "\n";
            }
            os << "burn_in = " << s.burn_in << "\n";
          } else {
            os << "type = renewal\nq = ";
            write_list(os, s.q);
            os << "\ntail = " << format_real(s.tail_value) << "\n";
          }
        },
        *c.process);
  }

  if (c.map) {
    const MapConfig& m = *c.map;
    os << "\n[map]\ntype = " << m.type << "\n";
    if (m.type == "expanding") os << "m = " << m.m << "\n";
    if (m.type == "beta") os << "beta = " << format_real(m.beta) << "\n";
    if (m.type == "rotation") {
      os << "theta = " << m.theta << "\n";
      if (m.theta == "designed") os << "eta_target = " << format_real(m.eta_target) << "\n";
    }
    if (m.type == "product") {
      os << "factors = ";
      write_ints(os, m.factors);
      os << "\n";
    }
    if (m.type == "uniform") os << "dim = " << m.dim << "\n";
    os << "metric = " << metric_name(m.metric) << "\n";
    if (m.digit_depth) os << "digit_depth = " << *m.digit_depth << "\n";
    if (m.burn_in) os << "burn_in = " << *m.burn_in << "\n";
  }

  os << "\n[schedule]\n";
  os << "n_min = " << c.schedule.n_min << "\n";
  os << "n_max = " << c.schedule.n_max << "\n";
  os << "ratio = " << format_real(c.schedule.ratio) << "\n";

  const auto& a = c.analysis;
  os << "\n[analysis]\n";
  os << "k = " << a.k << "\n";
  os << "n_points = " << a.n_points << "\n";
  os << "radii = ";
  write_list(os, a.radii);
  os << "\n";
  os << "theiler = " << a.theiler << "\n";
  os << "min_pairs = " << a.min_pairs << "\n";
  os << "max_fraction = " << format_real(a.max_fraction) << "\n";
  os << "n_values = ";
  write_ints(os, a.n_values);
  os << "\n";
  os << "radius = " << format_real(a.radius) << "\n";

  const auto& t = c.tolerance;
  if (t.rel || t.lo || t.hi || t.liminf_max || t.limsup_min) {
    os << "\n[tolerance]\n";
    if (t.rel) os << "rel = " << format_real(*t.rel) << "\n";
    if (t.lo) os << "lo = " << format_real(*t.lo) << "\n";
    if (t.hi) os << "hi = " << format_real(*t.hi) << "\n";
    if (t.liminf_max) os << "liminf_max = " << format_real(*t.liminf_max) << "\n";
    if (t.limsup_min) os << "limsup_min = " << format_real(*t.limsup_min) << "\n";
  }
  std::string out = os.str();
  // "radii = " with an empty list leaves a trailing blank.
  std::string cleaned;
  std::istringstream lines(out);
  for (std::string line; std::getline(lines, line);) {
    while (!line.empty() && line.back() == ' ') line.pop_back();
    cleaned += line + "\n";
  }
  return cleaned;
}

void validate_config(const ExperimentConfig& c) {
  if (c.trials == 0) throw ConfigError("trials must be >= 1");
  const bool needs_process = c.kind == ExperimentKind::Lcs || c.kind == ExperimentKind::Entropy ||
                             c.kind == ExperimentKind::Bridge;
  if (needs_process && !c.process) throw ConfigError(std::string(kind_name(c.kind)) + " needs a [process] section");
  if (!needs_process && !c.map) throw ConfigError(std::string(kind_name(c.kind)) + " needs a [map] section");
  if (needs_process && c.map) throw ConfigError(std::string(kind_name(c.kind)) + " does not use a [map] section");
  if (!needs_process && c.process) throw ConfigError(std::string(kind_name(c.kind)) + " does not use a [process] section");
  try {
    if (c.process) validate(*c.process);
    if (c.map && c.map->type != "uniform") validate(resolve_map(*c.map));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (c.map) {
    if (c.map->type == "uniform" && (c.map->dim == 0 || c.map->dim > 8)) throw ConfigError("uniform dim must be in 1..8");
    if (c.map->metric == Metric::Symbolic) throw ConfigError("maps use metric max or euclid");
  }
  const auto& s = c.schedule;
  const bool uses_schedule = c.kind == ExperimentKind::Lcs || c.kind == ExperimentKind::MinDist ||
                             c.kind == ExperimentKind::Rotation;
  if (uses_schedule) {
    if (s.n_min < 2 || s.n_min >= s.n_max) throw ConfigError("schedule needs 2 <= n_min < n_max");
    if (!(s.ratio > 1.0)) throw ConfigError("schedule ratio must be > 1");
  }
  if (c.kind == ExperimentKind::Rotation) {
    if (c.map->type != "rotation") throw ConfigError("rotation experiments need map type rotation");
    if (s.n_max < 1000) throw ConfigError("rotation experiments need n_max >= 1000");
  }
  const auto& a = c.analysis;
  if (c.kind == ExperimentKind::Entropy && (a.k == 0 || a.n_points <= a.k)) {
    throw ConfigError("entropy needs 1 <= k < n_points");
  }
  if ((c.kind == ExperimentKind::Dimension || c.kind == ExperimentKind::Moments) && a.n_points < 2) {
    throw ConfigError("n_points must be >= 2");
  }
  for (std::size_t i = 0; i < a.radii.size(); ++i) {
    if (!(a.radii[i] > 0)) throw ConfigError("radii must be positive");
    if (i > 0 && !(a.radii[i] < a.radii[i - 1])) throw ConfigError("radii must be strictly decreasing");
  }
  if (c.kind == ExperimentKind::Bridge || c.kind == ExperimentKind::Duality) {
    if (a.n_values.empty()) throw ConfigError("n_values must be nonempty");
    for (auto n : a.n_values) {
      if (n == 0) throw ConfigError("n_values must be positive");
    }
  }
  if (c.kind == ExperimentKind::Duality && !(a.radius > 0)) throw ConfigError("radius must be positive");
  if (!(a.max_fraction > 0 && a.max_fraction <= 1)) throw ConfigError("max_fraction must be in (0, 1]");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.seed = 1;
  switch (kind) {
    case ExperimentKind::Lcs:
      c.process = IidSource{{0.5, 0.5}};
      c.schedule = {1u << 10, 1u << 22, 2.0};
      c.trials = 8;
      break;
    case ExperimentKind::MinDist:
      c.map = MapConfig{};
      c.schedule = {100, 100000, 2.0};
      c.trials = 8;
      break;
    case ExperimentKind::Dimension:
      c.map = MapConfig{};
      c.map->type = "uniform";
      c.analysis.n_points = 10000;
      c.trials = 4;
      break;
    case ExperimentKind::Entropy:
      c.process = IidSource{{0.5, 0.5}};
      c.analysis.n_points = 1000000;
      c.analysis.k = 10;
      c.trials = 8;
      break;
    case ExperimentKind::Rotation:
      c.map = MapConfig{};
      c.map->type = "rotation";
      c.schedule = {1000, 1000000, 2.0};
      c.trials = 8;
      break;
    case ExperimentKind::Bridge:
      c.process = IidSource{{0.5, 0.5}};
      c.analysis.n_values = {16, 64, 256};
      c.trials = 400;
      break;
    case ExperimentKind::Duality:
      c.map = MapConfig{};
      c.map->type = "rotation";
      c.analysis.n_values = {16, 64, 256};
      c.analysis.radius = 0.002;
      c.trials = 400;
      break;
    case ExperimentKind::Moments:
      c.map = MapConfig{};
      c.analysis.n_points = 10000;
      c.trials = 1;
      break;
  }
  return c;
}

Fixed128 resolve_theta(const MapConfig& map) {
  if (map.theta == "golden") return golden_theta();
  if (map.theta == "sqrt2") return sqrt2_theta();
  if (map.theta == "designed") return design_theta(map.eta_target, 200).theta;
  try {
    return parse_theta_hex(map.theta);
  } catch (const Error& e) {
    throw ConfigError("theta must be golden, sqrt2, designed or 0x + 32 hex digits: " + std::string(e.what()));
  }
}

MapSpec resolve_map(const MapConfig& m) {
  if (m.type == "expanding") return ExpandingInteger{m.m};
  if (m.type == "ladder") return DyadicLadder{};
  if (m.type == "beta") return BetaMap{m.beta};
  if (m.type == "gauss") return GaussMap{};
  if (m.type == "rotation") return Rotation{resolve_theta(m)};
  if (m.type == "product") return ProductExpanding{m.factors};
  throw ConfigError("map type '" + m.type + "' has no map specification");
}

}  // namespace orbitmatch
