#include "plgrad/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace plgrad {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const std::map<std::string, std::set<std::string>>& problem_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"least_squares",
       {"kind", "n", "d", "mu", "L", "drift_std", "obs_noise_std", "spacing", "radius", "seed", "prox_handle"}},
      {"logistic", {"kind", "n", "d", "drift_std", "radius", "seed"}},
      {"lti_tracking", {"kind", "n", "m", "disturbance_std", "reference_amplitude", "radius", "seed"}},
      {"demand_response", {"kind", "n_der", "traces", "seed"}},
      {"quadratic",
       {"kind", "curvature", "center", "mu", "L", "regularizer", "l1_weight", "box_lo", "box_hi", "radius"}},
  };
  return keys;
}

const std::map<std::string, std::set<std::string>>& fixed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment",
       {"solver", "horizon", "trials", "seed", "deltas", "bound_inputs", "envelope", "envelope_scale", "psi_bar", "x0",
        "step", "outside_theory", "threads", "fit_samples"}},
      {"noise", {"family", "scale", "shape", "bias", "time_factors"}},
      {"validate", {"checks", "pl_samples", "gradient_points", "prox_instances"}},
  };
  return keys;
}

// Typed access to one section; every read marks the key as used.
class Section {
 public:
  Section(std::string name, const std::map<std::string, std::string>* values)
      : name_(std::move(name)), values_(values) {}

  bool has(const std::string& key) const { return values_ && values_->count(key); }

  std::string str(const std::string& key, std::string fallback) const {
    return has(key) ? values_->at(key) : std::move(fallback);
  }

  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_double(values_->at(key), key);
  }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const std::string& text = values_->at(key);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) fail(key, "expected an integer, got '" + text + "'");
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& text = values_->at(key);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail(key, "expected true or false, got '" + text + "'");
  }

  std::vector<double> list(const std::string& key) const {
    if (!has(key)) return {};
    try {
      return parse_double_list(values_->at(key));
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw std::invalid_argument("[" + name_ + "] " + key + ": " + what);
  }

 private:
  double parse_double(const std::string& text, const std::string& key) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) fail(key, "expected a number, got '" + text + "'");
    return v;
  }

  std::string name_;
  const std::map<std::string, std::string>* values_;
};

Section section(const ConfigFile& cfg, const std::string& name) {
  const auto it = cfg.sections.find(name);
  return {name, it == cfg.sections.end() ? nullptr : &it->second};
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int positive_int(const Section& s, const std::string& key, long fallback) {
  const long v = s.integer(key, fallback);
  if (v < 1 || v > 1'000'000'000) s.fail(key, "must be a positive integer");
  return static_cast<int>(v);
}

std::uint64_t seed_value(const Section& s, const std::string& key, long fallback) {
  const long v = s.integer(key, fallback);
  if (v < 0) s.fail(key, "must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

std::shared_ptr<const OnlineProblem> build_problem(const Section& p, const std::string& kind, long horizon) {
  if (kind == "least_squares") {
    LeastSquaresOptions o;
    o.n = positive_int(p, "n", o.n);
    o.d = positive_int(p, "d", o.d);
    o.mu = p.num("mu", o.mu);
    o.smoothness = p.num("L", o.smoothness);
    o.drift_std = p.num("drift_std", o.drift_std);
    o.obs_noise_std = p.num("obs_noise_std", o.obs_noise_std);
    const std::string spacing = p.str("spacing", "eigenvalues");
    if (spacing == "eigenvalues") {
      o.spacing = SpectrumSpacing::eigenvalues;
    } else if (spacing == "singular_values") {
      o.spacing = SpectrumSpacing::singular_values;
    } else {
      p.fail("spacing", "expected eigenvalues or singular_values");
    }
    o.radius = p.num("radius", o.radius);
    o.seed = seed_value(p, "seed", 1);
    o.prox_handle = p.flag("prox_handle", false);
    o.horizon = horizon;
    return std::make_shared<TimeVaryingLeastSquares>(o);
  }
  if (kind == "logistic") {
    LogisticOptions o;
    o.n = positive_int(p, "n", o.n);
    o.d = positive_int(p, "d", o.d);
    o.drift_std = p.num("drift_std", o.drift_std);
    o.radius = p.num("radius", o.radius);
    o.seed = seed_value(p, "seed", 1);
    o.horizon = horizon;
    return std::make_shared<OnlineLogistic>(o);
  }
  if (kind == "lti_tracking") {
    LtiOptions o;
    o.n = positive_int(p, "n", o.n);
    o.m = positive_int(p, "m", o.m);
    o.disturbance_std = p.num("disturbance_std", o.disturbance_std);
    o.reference_amplitude = p.num("reference_amplitude", o.reference_amplitude);
    o.radius = p.num("radius", o.radius);
    o.seed = seed_value(p, "seed", 1);
    o.horizon = horizon;
    return std::make_shared<LtiTracking>(o);
  }
  if (kind == "demand_response") {
    const int n_der = positive_int(p, "n_der", 20);
    DemandResponseOptions o;
    std::tie(o.lo, o.hi) = default_der_bounds(n_der);
    const std::string traces = p.str("traces", "");
    o.traces = traces.empty() ? synthetic_demand_response_traces(n_der, horizon, seed_value(p, "seed", 1))
                              : load_demand_response_traces(traces);
    o.horizon = horizon;
    return std::make_shared<DemandResponse>(std::move(o));
  }
  if (kind == "quadratic") {
    QuadraticOptions o;
    o.curvature = to_vector(p.list("curvature"));
    if (o.curvature.size() == 0) p.fail("curvature", "required");
    o.center = p.has("center") ? to_vector(p.list("center")) : Eigen::VectorXd::Zero(o.curvature.size());
    o.mu = p.num("mu", 0.0);
    o.smoothness = p.num("L", 0.0);
    o.radius = p.num("radius", 0.0);
    const std::string reg = p.str("regularizer", "absent");
    if (reg == "none") {
      o.regularizer = Regularizer<double>::none();
    } else if (reg == "l1") {
      o.regularizer = Regularizer<double>::l1(p.num("l1_weight", 0.0));
    } else if (reg == "box") {
      o.regularizer = Regularizer<double>::box(to_vector(p.list("box_lo")), to_vector(p.list("box_hi")));
    } else if (reg != "absent") {
      p.fail("regularizer", "expected none, l1 or box");
    }
    o.horizon = horizon;
    return std::make_shared<StaticQuadratic>(std::move(o));
  }
  throw std::invalid_argument("[problem] kind: unknown problem kind '" + kind + "'");
}

NoiseModel build_noise(const Section& s) {
  NoiseModel m;
  m.family = parse_noise_family(s.str("family", "zero"));
  m.scale = s.num("scale", 0.0);
  m.weibull_shape = s.num("shape", 1.0);
  m.bias = s.num("bias", 0.0);
  m.time_factors = s.list("time_factors");
  m.validate();
  return m;
}

const std::map<std::string, std::string, std::less<>>& presets() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"fig1-ls", R"(
[experiment]
solver = ogd
horizon = 500
trials = 100
seed = 1
deltas = 0.1, 0.05
[problem]
kind = least_squares
n = 10
d = 20
mu = 0.1
L = 1
drift_std = 0.31622776601683794
obs_noise_std = 0.031622776601683794
seed = 1
[noise]
family = gaussian
scale = 0.031622776601683794
)"},
      {"static-ls", R"(
[experiment]
solver = ogd
horizon = 100
trials = 1000
seed = 1
deltas = 0.1, 0.05
[problem]
kind = least_squares
n = 10
d = 20
mu = 0.1
L = 1
seed = 1
[noise]
family = gaussian
scale = 0.031622776601683794
)"},
      {"fig3-demand-response", R"(
[experiment]
solver = opgm
horizon = 500
trials = 50
seed = 1
deltas = 0.1, 0.05
[problem]
kind = demand_response
n_der = 20
seed = 1
[noise]
family = gaussian
scale = 3.1622776601683795
)"},
      {"fig3-demand-response-500", R"(
[experiment]
solver = opgm
horizon = 500
trials = 50
seed = 1
deltas = 0.1, 0.05
[problem]
kind = demand_response
n_der = 500
seed = 1
[noise]
family = gaussian
scale = 3.1622776601683795
)"},
      {"logistic", R"(
[experiment]
solver = ogd
horizon = 100
trials = 50
seed = 1
deltas = 0.1, 0.05
[problem]
kind = logistic
n = 5
d = 50
drift_std = 0.05
radius = 4
seed = 1
[noise]
family = gaussian
scale = 0.01
)"},
      {"lti-tracking", R"(
[experiment]
solver = ogd
horizon = 200
trials = 50
seed = 1
deltas = 0.1, 0.05
[problem]
kind = lti_tracking
n = 4
m = 6
disturbance_std = 0.1
reference_amplitude = 1
seed = 1
[noise]
family = gaussian
scale = 0.01
)"},
      {"quadratic", R"(
[experiment]
solver = opgm
horizon = 100
trials = 200
seed = 1
deltas = 0.1, 0.05
[problem]
kind = quadratic
curvature = 0.5, 2
center = 1, -0.3
regularizer = l1
l1_weight = 0.2
[noise]
family = gaussian
scale = 0.05
)"},
  };
  return table;
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  return it != sections.end() && it->second.count(key);
}

void ConfigFile::merge(const ConfigFile& other) {
  for (const auto& [name, values] : other.sections) {
    auto& target = sections[name];
    if (name == "problem" && values.count("kind") && target.count("kind") && values.at("kind") != target.at("kind")) {
      target.clear();
    }
    for (const auto& [key, value] : values) target[key] = value;
  }
}

ConfigFile parse_config(std::string_view text) {
  ConfigFile cfg;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    const auto fail = [&](const std::string& what) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": " + what);
    };
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (!fixed_keys().count(current) && current != "problem") fail("unknown section [" + current + "]");
      if (cfg.sections.count(current)) fail("duplicate section [" + current + "]");
      cfg.sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    if (current.empty()) fail("key outside a section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail("empty key");
    auto& sec = cfg.sections[current];
    if (sec.count(key)) fail("duplicate key '" + key + "'");
    sec[key] = value;
  }
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets()) names.push_back(name);
  return names;
}

ConfigFile preset_config(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  return parse_config(it->second);
}

const std::vector<std::string>& all_checks() {
  static const std::vector<std::string> checks{"pl",        "prox",        "gradient",   "recursion",
                                               "coverage", "expectation", "feasibility"};
  return checks;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = trim(text.substr(pos, comma - pos));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument("malformed number '" + std::string(item) + "' in list");
    }
    out.push_back(v);
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  return out;
}

RunSpec build_run_spec(const ConfigFile& config) {
  for (const auto& [name, values] : config.sections) {
    const std::set<std::string>* allowed = nullptr;
    if (name == "problem") {
      if (!values.count("kind")) throw std::invalid_argument("[problem] kind: required");
      const auto it = problem_keys().find(values.at("kind"));
      if (it == problem_keys().end()) {
        throw std::invalid_argument("[problem] kind: unknown problem kind '" + values.at("kind") + "'");
      }
      allowed = &it->second;
    } else {
      const auto it = fixed_keys().find(name);
      if (it == fixed_keys().end()) throw std::invalid_argument("unknown section [" + name + "]");
      allowed = &it->second;
    }
    for (const auto& [key, value] : values) {
      if (!allowed->count(key)) throw std::invalid_argument("[" + name + "] " + key + ": unknown key");
    }
  }
  if (!config.sections.count("problem")) throw std::invalid_argument("config has no [problem] section");

  const Section ex = section(config, "experiment");
  const Section pr = section(config, "problem");
  RunSpec spec;
  spec.problem_kind = pr.str("kind", "");

  ExperimentConfig& e = spec.experiment;
  e.horizon = positive_int(ex, "horizon", 500);
  e.trials = positive_int(ex, "trials", 100);
  e.seed = seed_value(ex, "seed", 1);
  e.solver = parse_solver_kind(ex.str("solver", "ogd"));
  if (ex.has("deltas")) e.deltas = ex.list("deltas");
  const std::string inputs = ex.str("bound_inputs", "empirical");
  if (inputs == "empirical") {
    e.bound_inputs = BoundInputMode::empirical;
  } else if (inputs == "analytic") {
    e.bound_inputs = BoundInputMode::analytic;
  } else {
    ex.fail("bound_inputs", "expected empirical or analytic");
  }
  const std::string envelope = ex.str("envelope", "analytic");
  if (envelope == "analytic") {
    e.envelope = EnvelopeMode::analytic;
  } else if (envelope == "fitted") {
    e.envelope = EnvelopeMode::fitted;
  } else {
    ex.fail("envelope", "expected analytic or fitted");
  }
  e.envelope_scale = ex.num("envelope_scale", 1.0);
  if (ex.has("psi_bar")) e.psi_bar = ex.num("psi_bar", 0.0);
  if (ex.has("step")) e.step.override_step = ex.num("step", 0.0);
  e.step.outside_theory = ex.flag("outside_theory", false);
  e.threads = static_cast<int>(ex.integer("threads", 0));
  e.fit_samples = ex.integer("fit_samples", e.fit_samples);

  e.problem = build_problem(pr, spec.problem_kind, e.horizon);
  if (ex.has("x0")) {
    const std::vector<double> x0 = ex.list("x0");
    if (x0.size() == 1) {
      e.x0 = Eigen::VectorXd::Constant(e.problem->dimension(), x0.front());
    } else if (static_cast<Eigen::Index>(x0.size()) == e.problem->dimension()) {
      e.x0 = to_vector(x0);
    } else {
      ex.fail("x0", "expected one value or one per coordinate");
    }
  }
  e.noise = build_noise(section(config, "noise"));
  e.validate();

  const Section va = section(config, "validate");
  if (va.has("checks")) {
    const std::string text = va.str("checks", "");
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      const std::string item(trim(text.substr(pos, comma - pos)));
      pos = comma + 1;
      if (item.empty()) continue;
      if (std::find(all_checks().begin(), all_checks().end(), item) == all_checks().end()) {
        va.fail("checks", "unknown check '" + item + "'");
      }
      spec.validate.checks.push_back(item);
    }
  } else {
    spec.validate.checks = all_checks();
  }
  spec.validate.pl_samples = positive_int(va, "pl_samples", spec.validate.pl_samples);
  spec.validate.gradient_points = positive_int(va, "gradient_points", spec.validate.gradient_points);
  spec.validate.prox_instances = positive_int(va, "prox_instances", spec.validate.prox_instances);
  return spec;
}

DemandResponseTraces load_demand_response_traces(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.emplace_back(trim(cell));
  }
  const std::size_t m = header.size() < 3 ? 0 : header.size() - 2;
  bool header_ok = m >= 1 && header.front() == "t" && header.back() == "p_ref";
  for (std::size_t j = 0; header_ok && j < m; ++j) header_ok = header[j + 1] == "w_" + std::to_string(j + 1);
  if (!header_ok) throw std::runtime_error("trace header must be t, w_1, ..., w_m, p_ref");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    try {
      row = parse_double_list(line);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    if (row.size() != header.size()) throw std::runtime_error("trace line " + std::to_string(line_no) + ": wrong column count");
    if (row.front() != static_cast<double>(rows.size())) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": t must count up from 0");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("trace file has no data rows");
  DemandResponseTraces traces;
  traces.w.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  traces.p_ref.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      traces.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
    }
    traces.p_ref[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  return traces;
}

}  // namespace plgrad
