#include "plgrad/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "plgrad/subweibull.hpp"

namespace plgrad {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<long> checkpoints(long horizon) {
  std::vector<long> t{0, horizon / 2, horizon};
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

// 1-D refined grid argmin of a convex function on [lo, hi].
template <typename F>
double grid_argmin_1d(const F& f, double lo, double hi) {
  constexpr int res = 101;
  double best = lo;
  for (int pass = 0; pass < 12; ++pass) {
    const double cell = (hi - lo) / (res - 1);
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < res; ++i) {
      const double y = lo + cell * i;
      const double v = f(y);
      if (v < best_val) {
        best_val = v;
        best = y;
      }
    }
    const double new_lo = std::max(lo, best - 2.0 * cell);
    const double new_hi = std::min(hi, best + 2.0 * cell);
    lo = new_lo;
    hi = new_hi;
  }
  return best;
}

CheckResult check_pl(const RunSpec& spec) {
  const OnlineProblem& p = *spec.experiment.problem;
  const std::uint64_t seed = spec.experiment.seed;
  const auto* reg = p.regularizer(0);
  if (!reg || reg->kind() == RegularizerKind::none) {
    bool pass = true;
    double worst = -std::numeric_limits<double>::infinity();
    double mu_hat = std::numeric_limits<double>::infinity();
    for (const long t : checkpoints(spec.experiment.horizon)) {
      const PlReport r = verify_pl(p, t, spec.validate.pl_samples, seed + static_cast<std::uint64_t>(t));
      worst = std::max(worst, r.max_violation);
      mu_hat = std::min(mu_hat, r.mu_hat);
      if (r.max_violation > 1e-9 * std::max(1.0, std::abs(p.optimal_value(t)))) pass = false;
    }
    return {"pl", pass,
            "max(2 mu gap - |grad|^2) = " + short_num(worst) + ", sampled mu >= " + short_num(mu_hat) +
                " vs declared " + short_num(p.pl_constant())};
  }
  if (p.dimension() > 3) {
    return {"pl", true, "skipped: proximal-PL grid search needs n <= 3 (n = " + std::to_string(p.dimension()) + ")"};
  }
  const int samples = std::min(spec.validate.pl_samples, 50);
  bool pass = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (const long t : checkpoints(spec.experiment.horizon)) {
    for (int i = 0; i < samples; ++i) {
      VectorXd x = sample_ball(p.dimension(), p.domain_radius(), seed + static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(i));
      const auto* g = p.regularizer(t);
      if (g->kind() == RegularizerKind::box) x = prox(*g, 1.0, x);
      const ProxPlReport r = verify_prox_pl(p, t, x, 41);
      const double violation = r.lhs - r.rhs;
      worst = std::max(worst, violation);
      if (violation > 1e-6 * std::max(1.0, r.rhs)) pass = false;
    }
  }
  return {"pl", pass, "proximal-PL: max(lhs - rhs) = " + short_num(worst)};
}

CheckResult check_prox(const RunSpec& spec) {
  const OnlineProblem& p = *spec.experiment.problem;
  const auto* problem_reg = p.regularizer(0);
  const Regularizer<double> reg = problem_reg ? *problem_reg : Regularizer<double>::none();
  const Eigen::Index n = p.dimension();
  auto engine = make_engine({spec.experiment.seed, 0, 0}, StreamPurpose::sampling);
  std::uniform_real_distribution<double> step_dist(0.1, 2.0);
  std::normal_distribution<double> normal;

  double worst = 0.0;
  for (int i = 0; i < spec.validate.prox_instances; ++i) {
    const double step = step_dist(engine);
    VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (reg.kind() == RegularizerKind::box) {
        const double mid = 0.5 * (reg.lower()[j] + reg.upper()[j]);
        const double half = 0.5 * (reg.upper()[j] - reg.lower()[j]);
        v[j] = mid + 1.5 * half * normal(engine);
      } else {
        v[j] = normal(engine);
      }
    }
    const VectorXd closed = prox(reg, step, v);
    for (Eigen::Index j = 0; j < n; ++j) {
      double lo = v[j] - step * reg.weight() - 1.0;
      double hi = v[j] + step * reg.weight() + 1.0;
      double weight = 0.0;
      if (reg.kind() == RegularizerKind::box) {
        lo = reg.lower()[j];
        hi = reg.upper()[j];
      } else if (reg.kind() == RegularizerKind::l1) {
        weight = reg.weight();
      }
      const double vj = v[j];
      const auto objective = [&](double y) { return (y - vj) * (y - vj) / (2.0 * step) + weight * std::abs(y); };
      worst = std::max(worst, std::abs(grid_argmin_1d(objective, lo, hi) - closed[j]));
    }
  }
  return {"prox", worst <= 1e-6, "max |grid argmin - prox| = " + short_num(worst) + " over " +
                                     std::to_string(spec.validate.prox_instances) + " instances"};
}

CheckResult check_gradient(const RunSpec& spec) {
  const OnlineProblem& p = *spec.experiment.problem;
  auto engine = make_engine({spec.experiment.seed, 1, 0}, StreamPurpose::sampling);
  std::uniform_int_distribution<long> time(0, spec.experiment.horizon);
  double worst = 0.0;
  for (int i = 0; i < spec.validate.gradient_points; ++i) {
    const long t = time(engine);
    const VectorXd x = sample_ball(p.dimension(), p.domain_radius(), spec.experiment.seed + 7919,
                                   static_cast<std::uint64_t>(i));
    worst = std::max(worst, gradient_fd_error(p, t, x));
  }
  return {"gradient", worst <= 1e-6, "max relative finite-difference error " + short_num(worst)};
}

}  // namespace

RunSpec resolve_spec(const CliOptions& options) {
  if (!options.config && !options.preset) throw std::invalid_argument("give --config or --preset");
  ConfigFile cfg;
  if (options.preset) cfg = preset_config(*options.preset);
  if (options.config) cfg.merge(load_config(*options.config));
  if (options.trials) cfg.sections["experiment"]["trials"] = std::to_string(*options.trials);
  if (options.seed) cfg.sections["experiment"]["seed"] = std::to_string(*options.seed);
  if (options.deltas) {
    std::string list;
    for (const double d : *options.deltas) list += (list.empty() ? "" : ",") + num(d);
    cfg.sections["experiment"]["deltas"] = list;
  }
  return build_run_spec(cfg);
}

std::string delta_label(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", delta);
  return buf;
}

std::string regret_csv(const AggregateReport& r) {
  std::string s = "t,mean_regret,std_regret,band_lo,band_hi,mean_band_lo,mean_band_hi,bound_expectation";
  for (const auto& hp : r.highprob) s += ",bound_highprob_" + delta_label(*hp.delta);
  s += '\n';
  for (std::size_t t = 0; t < r.mean.size(); ++t) {
    s += std::to_string(t);
    for (const double v : {r.mean[t], r.std[t], r.band_lo[t], r.band_hi[t], r.mean_band_lo[t], r.mean_band_hi[t],
                           r.expectation.values[t]}) {
      s += ',' + num(v);
    }
    for (const auto& hp : r.highprob) s += ',' + num(hp.values[t]);
    s += '\n';
  }
  return s;
}

std::string bounds_csv(const AggregateReport& r) {
  std::string s = "t,bound_expectation_empirical,bound_expectation_analytic";
  for (const auto& hp : r.highprob) s += ",bound_highprob_" + delta_label(*hp.delta);
  for (const auto& mk : r.markov) s += ",bound_markov_" + delta_label(*mk.delta);
  s += ",asymptote\n";
  for (std::size_t t = 0; t < r.mean.size(); ++t) {
    s += std::to_string(t) + ',' + num(r.expectation_empirical.values[t]) + ',' +
         num(r.expectation_analytic.values[t]);
    for (const auto& hp : r.highprob) s += ',' + num(hp.values[t]);
    for (const auto& mk : r.markov) s += ',' + num(mk.values[t]);
    s += ',' + num(r.asymptote) + '\n';
  }
  return s;
}

std::string summary_text(const RunSpec& spec, const AggregateReport& r) {
  const ExperimentConfig& e = spec.experiment;
  const OnlineProblem& p = *e.problem;
  std::string s;
  const auto line = [&s](const std::string& key, const std::string& value) { s += key + " = " + value + '\n'; };
  line("problem", spec.problem_kind);
  line("solver", std::string(to_string(r.solver)));
  line("noise", std::string(to_string(e.noise.family)));
  line("noise_scale", num(e.noise.scale));
  line("horizon", std::to_string(r.horizon));
  line("trials", std::to_string(r.trials));
  line("seed", std::to_string(r.seed));
  line("dimension", std::to_string(p.dimension()));
  line("L", num(p.smoothness()));
  line("mu", num(p.pl_constant()));
  line("zeta", num(r.zeta));
  line("D", num(p.diameter()));
  line("r0", num(r.r0));
  line("theta", num(r.theta));
  line("bound_inputs", e.bound_inputs == BoundInputMode::empirical ? "empirical" : "analytic");
  line("envelope", e.envelope == EnvelopeMode::analytic ? "analytic" : "fitted");
  line("envelope_scale", num(e.envelope_scale));
  line("envelope_k0", num(r.envelope_ks.empty() ? 0.0 : r.envelope_ks.front()));
  line("expectation_kind", std::string(to_string(r.expectation.kind)));
  line("final_mean_regret", num(r.mean.back()));
  line("final_std_regret", num(r.std.back()));
  line("final_bound_expectation", num(r.expectation.values.back()));
  for (std::size_t i = 0; i < r.highprob.size(); ++i) {
    const std::string d = delta_label(*r.highprob[i].delta);
    line("final_bound_highprob_" + d, num(r.highprob[i].values.back()));
    line("final_bound_markov_" + d, num(r.markov[i].values.back()));
  }
  line("e_bar", num(r.e_bar));
  line("psi_bar", num(r.psi_bar));
  line("psi_bar_source", r.psi_bar_measured ? "empirical sup" : "supplied");
  line("asymptote", num(r.asymptote));
  line("optimal_values", r.optimal_exact ? "exact" : "inner solve");
  line("max_recursion_violation", num(r.max_recursion_violation));
  line("recursion_failures", std::to_string(r.recursion_failures));
  line("infeasible_iterates", std::to_string(r.infeasible_iterates));
  line("domain_excursions", std::to_string(r.domain_excursions));
  line("max_step_norm", num(r.max_step_norm));
  for (const CheckResult& c : validate_bounds(r).checks) line("check." + c.name, c.pass ? "pass" : "fail");
  return s;
}

ValidationSummary run_validation(const RunSpec& spec) {
  const auto& selected = spec.validate.checks;
  if (selected.empty()) throw std::invalid_argument("no checks selected");
  const auto wants = [&](const std::string& name) {
    return std::find(selected.begin(), selected.end(), name) != selected.end();
  };
  ValidationSummary out;
  if (wants("pl")) out.checks.push_back(check_pl(spec));
  if (wants("prox")) out.checks.push_back(check_prox(spec));
  if (wants("gradient")) out.checks.push_back(check_gradient(spec));
  if (wants("recursion") || wants("coverage") || wants("expectation") || wants("feasibility")) {
    const ValidationSummary bounds = validate_bounds(run_experiment(spec.experiment));
    for (const CheckResult& c : bounds.checks) {
      const std::string family = c.name.substr(0, c.name.find(' '));
      if (wants(family)) out.checks.push_back(c);
    }
    out.coverage = bounds.coverage;
  }
  return out;
}

int cmd_run(const CliOptions& options, std::ostream& out, std::ostream& err) {
  RunSpec spec;
  AggregateReport report;
  try {
    spec = resolve_spec(options);
    report = run_experiment(spec.experiment);
  } catch (const std::exception& e) {
    err << "plgrad run: " << e.what() << '\n';
    return 2;
  }
  // Render everything before touching the file system.
  const std::string regret = regret_csv(report);
  const std::string bounds = bounds_csv(report);
  const std::string summary = summary_text(spec, report);
  try {
    std::filesystem::create_directories(options.out);
    write_file(options.out / "regret.csv", regret);
    write_file(options.out / "bounds.csv", bounds);
    write_file(options.out / "summary.txt", summary);
  } catch (const std::exception& e) {
    err << "plgrad run: " << e.what() << '\n';
    return 2;
  }
  out << "wrote " << (options.out / "regret.csv").string() << ", bounds.csv, summary.txt\n";
  out << "final mean regret " << num(report.mean.back()) << ", expectation bound "
      << num(report.expectation.values.back()) << '\n';
  return 0;
}

int cmd_validate(const CliOptions& options, std::ostream& out, std::ostream& err) {
  ValidationSummary summary;
  try {
    summary = run_validation(resolve_spec(options));
  } catch (const std::exception& e) {
    err << "plgrad validate: " << e.what() << '\n';
    return 2;
  }
  for (const CheckResult& c : summary.checks) {
    out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  " << c.detail << '\n';
  }
  const bool ok = summary.all_pass();
  out << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? 0 : 1;
}

int cmd_bounds(const BoundsParams& params, std::ostream& out, std::ostream& err) {
  try {
    if (params.deltas.empty()) throw std::invalid_argument("no delta given");
    const SubWeibullParams x(params.theta, params.k);
    out << "theta = " << num(params.theta) << '\n';
    out << "K = " << num(params.k) << '\n';
    out << "tail_constant = " << num(tail_constant(x)) << '\n';
    for (const double delta : params.deltas) {
      const std::string d = delta_label(delta);
      out << "hp_bound_" << d << " = " << num(hp_bound(x, delta)) << '\n';
      out << "h_" << d << " = " << num(ogd_highprob_factor(params.theta, delta)) << '\n';
      out << "h_p_" << d << " = " << num(opgm_highprob_factor(params.theta, delta)) << '\n';
    }
    if (params.mu.has_value() != params.smoothness.has_value()) {
      throw std::invalid_argument("give both --mu and --L");
    }
    if (!params.mu) return 0;
    const double zeta = contraction_factor(*params.mu, *params.smoothness);
    out << "zeta = " << num(zeta) << '\n';
    out << "asymptote = " << num(asymptote(*params.mu, *params.smoothness, params.e_bar, params.psi_bar)) << '\n';
    if (params.horizon <= 0) return 0;

    const auto steps = static_cast<std::size_t>(params.horizon);
    const std::vector<double> second(steps, params.e_bar), first(steps, std::sqrt(params.e_bar)),
        ks(steps, params.k), psi(steps, params.psi_bar);
    std::vector<BoundSeries> series;
    series.push_back(ogd_expectation_bound(params.r0, zeta, *params.smoothness, second, psi));
    for (const double delta : params.deltas) {
      series.push_back(ogd_highprob_bound(params.r0, zeta, *params.smoothness, ks, psi, params.theta, delta));
    }
    if (params.diameter) {
      series.push_back(opgm_expectation_bound(params.r0, zeta, first, psi, *params.diameter));
      for (const double delta : params.deltas) {
        series.push_back(opgm_highprob_bound(params.r0, zeta, ks, psi, *params.diameter, params.theta, delta));
      }
    }
    out << 't';
    for (const auto& b : series) {
      out << ',' << to_string(b.kind);
      if (b.delta) out << '_' << delta_label(*b.delta);
    }
    out << '\n';
    for (std::size_t t = 0; t <= steps; ++t) {
      out << t;
      for (const auto& b : series) out << ',' << num(b.values[t]);
      out << '\n';
    }
  } catch (const std::exception& e) {
    err << "plgrad bounds: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace plgrad
