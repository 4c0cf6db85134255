#include "plgrad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "plgrad/subweibull.hpp"

namespace plgrad {
namespace {

constexpr double kRecursionTolerance = 1e-9;

VectorXd start_point(const ExperimentConfig& config) {
  return config.x0 ? *config.x0 : VectorXd::Zero(config.problem->dimension());
}

// Runs body(i) for i in [0, count) on `threads` workers. The first failure
// in index order is rethrown after all workers finish.
template <typename Body>
void parallel_for(int count, int threads, Body body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<Trajectory> run_trials(const ExperimentConfig& config, bool keep_steps_only) {
  config.validate();
  const VectorXd x0 = start_point(config);
  std::vector<Trajectory> out(static_cast<std::size_t>(config.trials));
  RunOptions options;
  options.keep_iterates = !keep_steps_only;
  options.step = config.step;
  parallel_for(config.trials, resolve_threads(config.threads, config.trials), [&](int i) {
    const StreamKey key{config.seed, static_cast<std::uint64_t>(i), 0};
    out[static_cast<std::size_t>(i)] = run(*config.problem, config.solver, config.noise, config.horizon, x0, key,
                                           options);
  });
  return out;
}

// K_t of ||M nu_t|| for t = 0..T-1.
std::vector<double> envelope_series(const ExperimentConfig& config) {
  const MatrixXd map = config.problem->noise_map();
  const auto steps = static_cast<std::size_t>(config.horizon);
  std::vector<double> ks(steps, 0.0);
  if (config.envelope == EnvelopeMode::analytic) {
    for (std::size_t t = 0; t < steps; ++t) {
      ks[t] = envelope_mapped(config.noise, map, static_cast<long>(t)).k();
    }
  } else {
    if (config.noise.bias != 0.0) throw std::invalid_argument("fitted envelopes require unbiased noise");
    NoiseModel base = config.noise;
    base.time_factors.clear();
    auto engine = make_engine({config.seed, 0, 0}, StreamPurpose::envelope_fit);
    std::vector<double> norms(static_cast<std::size_t>(config.fit_samples));
    for (double& v : norms) v = (map * sample_with(base, map.cols(), 0, engine)).norm();
    const double k0 = fit_from_samples<double>(norms, base.theta()).k();
    for (std::size_t t = 0; t < steps; ++t) {
      ks[t] = k0 * (config.noise.scale_at(static_cast<long>(t)) / std::max(base.scale, 1e-300));
    }
  }
  for (double& k : ks) k *= config.envelope_scale;
  return ks;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!problem) throw std::invalid_argument("experiment has no problem");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (horizon > problem->horizon()) throw std::invalid_argument("horizon exceeds the problem horizon");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  for (const double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("every delta must lie in (0, 1)");
  }
  if (!(envelope_scale > 0.0)) throw std::invalid_argument("envelope_scale must be positive");
  if (psi_bar && !(*psi_bar >= 0.0)) throw std::invalid_argument("psi_bar must be nonnegative");
  if (fit_samples < 1) throw std::invalid_argument("fit_samples must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be nonnegative");
  noise.validate();
  const auto* reg = problem->regularizer(0);
  if (solver == SolverKind::ogd && reg && reg->kind() != RegularizerKind::none) {
    throw std::invalid_argument("ogd does not accept a regularizer; use opgm");
  }
  if (solver == SolverKind::opgm && !reg) {
    throw std::invalid_argument("opgm needs a regularizer (kind none is allowed)");
  }
  if (x0 && x0->size() != problem->dimension()) throw std::invalid_argument("x0 has the wrong dimension");
}

int resolve_threads(int requested, int trials) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("PLGRAD_THREADS"); env && *env) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (*end != '\0' || v < 1) throw std::invalid_argument("PLGRAD_THREADS must be a positive integer");
      n = static_cast<int>(std::min<long>(v, 1024));
    } else {
      n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
  }
  return std::max(1, std::min(n, trials));
}

AggregateReport run_experiment(const ExperimentConfig& config) {
  std::vector<Trajectory> trajectories = run_trials(config, true);
  const OnlineProblem& problem = *config.problem;
  const long T = config.horizon;
  const auto R = static_cast<double>(config.trials);
  const auto rows = static_cast<std::size_t>(T) + 1;

  AggregateReport rep;
  rep.solver = config.solver;
  rep.horizon = T;
  rep.trials = config.trials;
  rep.seed = config.seed;
  rep.zeta = contraction_factor(problem.pl_constant(), problem.smoothness());
  rep.theta = config.noise.theta();
  rep.r0 = trajectories.front().steps.front().regret;
  rep.optimal_exact = trajectories.front().optimal_exact;

  rep.mean.assign(rows, 0.0);
  rep.std.assign(rows, 0.0);
  rep.mean_error_sq.assign(rows - 1, 0.0);
  rep.mean_error.assign(rows - 1, 0.0);
  rep.mean_psi.assign(rows - 1, 0.0);
  rep.max_psi.assign(rows - 1, 0.0);

  // Fixed reduction order: trial by trial. Regrets are summed as offsets
  // from the first trial, so a column of equal values averages exactly.
  const Trajectory& first = trajectories.front();
  for (const Trajectory& tr : trajectories) {
    for (std::size_t t = 0; t < rows; ++t) rep.mean[t] += tr.steps[t].regret - first.steps[t].regret;
    for (std::size_t t = 0; t + 1 < rows; ++t) {
      const StepRecord& s = tr.steps[t + 1];
      rep.mean_error_sq[t] += s.error_norm * s.error_norm;
      rep.mean_error[t] += s.error_norm;
      rep.mean_psi[t] += s.variability.psi_tilde;
      rep.max_psi[t] = std::max(rep.max_psi[t], s.variability.psi_tilde);
    }
  }
  for (std::size_t t = 0; t < rows; ++t) rep.mean[t] = first.steps[t].regret + rep.mean[t] / R;
  for (std::size_t t = 0; t + 1 < rows; ++t) {
    rep.mean_error_sq[t] /= R;
    rep.mean_error[t] /= R;
    rep.mean_psi[t] /= R;
  }
  if (config.trials > 1) {
    for (const Trajectory& tr : trajectories) {
      for (std::size_t t = 0; t < rows; ++t) {
        const double d = tr.steps[t].regret - rep.mean[t];
        rep.std[t] += d * d;
      }
    }
    for (double& v : rep.std) v = std::sqrt(v / (R - 1.0));
  }
  rep.band_lo.resize(rows);
  rep.band_hi.resize(rows);
  rep.mean_band_lo.resize(rows);
  rep.mean_band_hi.resize(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    rep.band_lo[t] = rep.mean[t] - 3.0 * rep.std[t];
    rep.band_hi[t] = rep.mean[t] + 3.0 * rep.std[t];
    rep.mean_band_lo[t] = rep.mean[t] - 3.0 * rep.std[t] / std::sqrt(R);
    rep.mean_band_hi[t] = rep.mean[t] + 3.0 * rep.std[t] / std::sqrt(R);
  }

  // Bound inputs.
  const MatrixXd map = problem.noise_map();
  std::vector<double> analytic_sq(rows - 1), analytic_first(rows - 1);
  for (std::size_t t = 0; t + 1 < rows; ++t) {
    analytic_sq[t] = second_moment_mapped(config.noise, map, static_cast<long>(t));
    analytic_first[t] = first_moment_mapped(config.noise, map, static_cast<long>(t)).value;
  }
  const std::vector<double> psi_expect =
      config.psi_bar ? std::vector<double>(rows - 1, *config.psi_bar) : rep.mean_psi;
  const std::vector<double> psi_hp = config.psi_bar ? std::vector<double>(rows - 1, *config.psi_bar) : rep.max_psi;

  const double L = problem.smoothness();
  const double D = problem.diameter();
  const bool trajectory_psi = !config.psi_bar;
  if (config.solver == SolverKind::ogd) {
    rep.expectation_empirical =
        ogd_expectation_bound(rep.r0, rep.zeta, L, rep.mean_error_sq, psi_expect, trajectory_psi);
    rep.expectation_analytic = ogd_expectation_bound(rep.r0, rep.zeta, L, analytic_sq, psi_expect, trajectory_psi);
  } else {
    rep.expectation_empirical = opgm_expectation_bound(rep.r0, rep.zeta, rep.mean_error, psi_expect, D);
    rep.expectation_analytic = opgm_expectation_bound(rep.r0, rep.zeta, analytic_first, psi_expect, D);
  }
  rep.expectation = config.bound_inputs == BoundInputMode::empirical ? rep.expectation_empirical
                                                                      : rep.expectation_analytic;

  rep.envelope_ks = envelope_series(config);
  for (const double delta : config.deltas) {
    if (config.solver == SolverKind::ogd) {
      rep.highprob.push_back(ogd_highprob_bound(rep.r0, rep.zeta, L, rep.envelope_ks, psi_hp, rep.theta, delta));
    } else {
      rep.highprob.push_back(opgm_highprob_bound(rep.r0, rep.zeta, rep.envelope_ks, psi_hp, D, rep.theta, delta));
    }
    rep.markov.push_back(markov_highprob_bound(rep.expectation, delta));
  }

  rep.e_bar = analytic_sq.empty() ? 0.0 : *std::max_element(analytic_sq.begin(), analytic_sq.end());
  rep.psi_bar_measured = !config.psi_bar;
  rep.psi_bar = config.psi_bar ? *config.psi_bar
                               : (rep.max_psi.empty() ? 0.0 : *std::max_element(rep.max_psi.begin(), rep.max_psi.end()));
  rep.asymptote = asymptote(problem.pl_constant(), L, rep.e_bar, rep.psi_bar);

  // Pathwise recursions.
  rep.max_recursion_violation = -std::numeric_limits<double>::infinity();
  for (const Trajectory& tr : trajectories) {
    for (std::size_t t = 0; t + 1 < tr.steps.size(); ++t) {
      const StepRecord& next = tr.steps[t + 1];
      const double e = next.error_norm;
      const double noise_term = config.solver == SolverKind::ogd ? e * e / (2.0 * L) : 2.0 * D * e;
      const double violation = next.regret - (rep.zeta * tr.steps[t].regret + noise_term + next.variability.psi_tilde);
      rep.max_recursion_violation = std::max(rep.max_recursion_violation, violation);
      ++rep.recursion_steps;
      if (violation > kRecursionTolerance) ++rep.recursion_failures;
    }
    rep.infeasible_iterates += tr.infeasible_iterates;
    rep.domain_excursions += tr.domain_excursions;
    rep.max_step_norm = std::max(rep.max_step_norm, tr.max_step_norm);
  }
  rep.trajectories = std::move(trajectories);
  return rep;
}

bool ValidationSummary::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

int binomial_upper_quantile(int n, double p, double level) {
  if (n < 0) throw std::invalid_argument("binomial size must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial probability must lie in [0, 1]");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  if (p == 0.0) return 0;
  if (p == 1.0) return n;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double lg_n = std::lgamma(n + 1.0);
  double cdf = 0.0;
  for (int k = 0; k <= n; ++k) {
    cdf += std::exp(lg_n - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * log_p + (n - k) * log_q);
    if (cdf >= level) return k;
  }
  return n;
}

ValidationSummary validate_bounds(const AggregateReport& report) {
  ValidationSummary out;
  const auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };

  {
    double worst = -std::numeric_limits<double>::infinity();
    long worst_t = 0;
    bool pass = true;
    for (std::size_t t = 0; t < report.mean.size(); ++t) {
      const double bound = report.expectation.values[t];
      const double gap = report.mean[t] - bound;
      if (gap > worst) {
        worst = gap;
        worst_t = static_cast<long>(t);
      }
      // Floating-point slack only; the dominance is an identity of means.
      if (gap > 1e-12 * std::max(1.0, std::abs(bound))) pass = false;
    }
    out.checks.push_back({"expectation", pass,
                          "max(mean - bound) = " + fmt(worst) + " at t = " + std::to_string(worst_t) + " (" +
                              std::string(to_string(report.expectation.kind)) + ")"});
  }

  out.checks.push_back({"recursion", report.recursion_failures == 0,
                        std::to_string(report.recursion_failures) + " of " + std::to_string(report.recursion_steps) +
                            " steps above 1e-9; max violation " + fmt(report.max_recursion_violation)});

  const long T = report.horizon;
  std::vector<long> checkpoints{T / 4, T / 2, T};
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  for (const BoundSeries& hp : report.highprob) {
    const double delta = *hp.delta;
    bool pass = true;
    std::string detail;
    for (const long t : checkpoints) {
      CoverageRecord rec;
      rec.delta = delta;
      rec.t = t;
      rec.trials = report.trials;
      rec.allowed = binomial_upper_quantile(report.trials, delta, 0.99);
      for (const Trajectory& tr : report.trajectories) {
        if (tr.steps[static_cast<std::size_t>(t)].regret > hp.values[static_cast<std::size_t>(t)]) ++rec.violations;
      }
      if (rec.violations > rec.allowed) pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "t = " + std::to_string(t) + ": " + std::to_string(rec.violations) + "/" +
                std::to_string(rec.trials) + " (allowed " + std::to_string(rec.allowed) + ")";
      out.coverage.push_back(rec);
    }
    out.checks.push_back({"coverage delta=" + fmt(delta), pass, detail});
  }

  out.checks.push_back({"feasibility", report.infeasible_iterates == 0,
                        std::to_string(report.infeasible_iterates) + " infeasible iterates"});
  return out;
}

AsymptoteReport longrun_asymptote_check(const ExperimentConfig& config, long burn_in) {
  if (burn_in < 0 || burn_in >= config.horizon) throw std::invalid_argument("burn_in must lie in [0, horizon)");
  const std::vector<Trajectory> trajectories = run_trials(config, true);
  const OnlineProblem& problem = *config.problem;
  const MatrixXd map = problem.noise_map();

  AsymptoteReport out;
  for (long t = 0; t < config.horizon; ++t) out.e_bar = std::max(out.e_bar, second_moment_mapped(config.noise, map, t));
  out.psi_bar_measured = !config.psi_bar;
  if (config.psi_bar) {
    out.psi_bar = *config.psi_bar;
  } else {
    for (const Trajectory& tr : trajectories) {
      for (const StepRecord& s : tr.steps) out.psi_bar = std::max(out.psi_bar, s.variability.psi_tilde);
    }
  }
  out.asymptote = asymptote(problem.pl_constant(), problem.smoothness(), out.e_bar, out.psi_bar);

  int exceeding = 0;
  for (const Trajectory& tr : trajectories) {
    double m = 0.0;
    for (std::size_t t = static_cast<std::size_t>(burn_in) + 1; t < tr.steps.size(); ++t) {
      m = std::max(m, tr.steps[t].regret);
    }
    out.tail_max.push_back(m);
    if (m > out.asymptote) ++exceeding;
  }
  out.median_tail_max = median(out.tail_max);
  out.fraction_exceeding = static_cast<double>(exceeding) / static_cast<double>(trajectories.size());
  return out;
}

}  // namespace plgrad
