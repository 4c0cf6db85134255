// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status
// nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "plgrad/cli.hpp"
#include "plgrad/config.hpp"
#include "plgrad/harness.hpp"
#include "plgrad/noise.hpp"
#include "plgrad/prox.hpp"
#include "plgrad/solvers.hpp"
#include "plgrad/subweibull.hpp"

using namespace plgrad;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

RunSpec preset_spec(const std::string& name, const std::vector<std::pair<std::string, std::string>>& experiment = {},
                    const std::vector<std::pair<std::string, std::string>>& noise = {}) {
  ConfigFile cfg = preset_config(name);
  for (const auto& [k, v] : experiment) cfg.sections["experiment"][k] = v;
  for (const auto& [k, v] : noise) cfg.sections["noise"][k] = v;
  return build_run_spec(cfg);
}

// Kept for the pathwise recursion criterion.
std::vector<std::pair<std::string, AggregateReport>> g_reports;

double zeta_of(const OnlineProblem& p) { return 1.0 - p.pl_constant() / p.smoothness(); }

bool dominated(const std::vector<double>& mean, const std::vector<double>& bound, long& first_bad) {
  for (std::size_t t = 0; t < mean.size(); ++t) {
    if (!(mean[t] <= bound[t])) {
      first_bad = static_cast<long>(t);
      return false;
    }
  }
  return true;
}

// -- 1 --------------------------------------------------------------------
Outcome noiseless_contraction() {
  const RunSpec spec = preset_spec("static-ls", {{"horizon", "200"}}, {{"family", "zero"}, {"scale", "0"}});
  const OnlineProblem& p = *spec.experiment.problem;
  const double bound = zeta_of(p) + 1e-9;
  const Trajectory tr = run(p, SolverKind::ogd, NoiseModel::zero(), 200, VectorXd::Zero(p.dimension()), {1, 0, 0},
                            {.keep_iterates = false, .step = {}});
  double worst = 0.0;
  int checked = 0;
  for (std::size_t t = 0; t + 1 < tr.steps.size(); ++t) {
    if (tr.steps[t].regret <= 1e-12) continue;
    worst = std::max(worst, tr.steps[t + 1].regret / tr.steps[t].regret);
    ++checked;
  }
  return {checked > 0 && worst <= bound,
          "max r_{t+1}/r_t = " + num(worst) + " over " + std::to_string(checked) + " steps (zeta " + num(zeta_of(p)) + ")"};
}

// -- 2 --------------------------------------------------------------------
Outcome figure1_dominance() {
  const RunSpec spec = preset_spec("fig1-ls");
  AggregateReport rep = run_experiment(spec.experiment);
  long bad = -1;
  const bool dom = dominated(rep.mean, rep.expectation_empirical.values, bad);
  const std::size_t T = rep.mean.size() - 1;
  bool monotone = true;
  for (std::size_t t = T - 100; t < T; ++t) monotone = monotone && rep.mean[t + 1] > rep.mean[t];
  std::string detail = dom ? "mean <= bound at all " + std::to_string(T + 1) + " steps" : "mean above bound at t = " + std::to_string(bad);
  detail += "; last-100 mean regret " + num(rep.mean[T - 100]) + " .. " + num(rep.mean[T]) +
            (monotone ? " grows monotonically" : " not monotone");
  g_reports.emplace_back("fig1-ls", std::move(rep));
  return {dom && !monotone, detail};
}

// -- 3 --------------------------------------------------------------------
Outcome highprob_coverage() {
  const RunSpec spec = preset_spec("static-ls", {{"envelope", "fitted"}, {"deltas", "0.1, 0.05"}, {"trials", "1000"}, {"horizon", "100"}});
  AggregateReport rep = run_experiment(spec.experiment);
  bool ok = true;
  std::string detail;
  for (const BoundSeries& hp : rep.highprob) {
    const double delta = *hp.delta;
    const int allowed = oracle::binomial_quantile(rep.trials, delta, 0.99);
    for (const long t : {50L, 100L}) {
      int above = 0;
      for (const Trajectory& tr : rep.trajectories) above += tr.steps[static_cast<std::size_t>(t)].regret > hp.values[static_cast<std::size_t>(t)];
      ok = ok && above <= allowed;
      detail += "delta " + num(delta) + " t " + std::to_string(t) + ": " + std::to_string(above) + "/" +
                std::to_string(rep.trials) + " (allowed " + std::to_string(allowed) + "); ";
    }
  }
  g_reports.emplace_back("static-ls fitted", std::move(rep));
  return {ok, detail};
}

// -- 6 (run before 4, which reuses its trajectories) -----------------------
Outcome demand_response() {
  const RunSpec spec = preset_spec("fig3-demand-response", {}, {{"family", "gaussian"}, {"scale", "10"}});
  AggregateReport rep = run_experiment(spec.experiment);
  const OnlineProblem& p = *spec.experiment.problem;
  long infeasible = 0;
  for (const Trajectory& tr : rep.trajectories) {
    for (std::size_t t = 0; t < tr.iterates.size(); ++t) {
      infeasible += !p.regularizer(static_cast<long>(t))->contains(tr.iterates[t]);
    }
  }
  long bad = -1;
  const bool dom = dominated(rep.mean, rep.expectation.values, bad);
  const std::size_t T = rep.mean.size() - 1;
  std::vector<double> tail(rep.mean.end() - 100, rep.mean.end());
  std::nth_element(tail.begin(), tail.begin() + 50, tail.end());
  const double plateau = tail[50];
  const double drop = std::log10(rep.mean[0] / plateau);
  std::string detail = std::to_string(infeasible) + " infeasible iterates; " +
                       (dom ? "mean <= bound at all " + std::to_string(T + 1) + " steps" : "mean above bound at t = " + std::to_string(bad)) +
                       "; r0 " + num(rep.mean[0]) + ", plateau " + num(plateau) + " (" + num(drop) + " orders)";
  g_reports.emplace_back("fig3-demand-response", std::move(rep));
  return {infeasible == 0 && dom && drop >= 2.0, detail};
}

// -- 4 --------------------------------------------------------------------
Outcome pathwise_recursions() {
  std::string detail;
  bool ok = true;
  for (const auto& [name, rep] : g_reports) {
    const RunSpec spec = name == "fig1-ls" ? preset_spec("fig1-ls")
                         : name == "fig3-demand-response"
                             ? preset_spec("fig3-demand-response", {}, {{"family", "gaussian"}, {"scale", "10"}})
                             : preset_spec("static-ls", {{"horizon", "100"}});
    const OnlineProblem& p = *spec.experiment.problem;
    const double zeta = zeta_of(p);
    const double L = p.smoothness();
    const double D = p.diameter();
    long steps = 0;
    long failures = 0;
    for (const Trajectory& tr : rep.trajectories) {
      for (std::size_t t = 0; t + 1 < tr.steps.size(); ++t) {
        const double e = tr.steps[t + 1].error_norm;
        const double noise = rep.solver == SolverKind::ogd ? e * e / (2.0 * L) : 2.0 * D * e;
        const double rhs = zeta * tr.steps[t].regret + noise + tr.steps[t + 1].variability.psi_tilde + 1e-9;
        ++steps;
        failures += tr.steps[t + 1].regret > rhs;
      }
    }
    ok = ok && failures == 0 && steps > 0;
    detail += name + " " + std::to_string(steps - failures) + "/" + std::to_string(steps) + "; ";
  }
  return {ok && g_reports.size() == 3, detail};
}

// -- 5 --------------------------------------------------------------------
Outcome subweibull_suite() {
  bool ok = true;
  std::string detail;
  using S = SubWeibullParams;
  const S x(0.5, 2.0);
  // closure formulas, evaluated by hand
  ok = ok && scale(x, -3.0) == S(0.5, 6.0);
  ok = ok && add_scalar(x, -1.5) == S(0.5, 3.5);
  ok = ok && sum(x, S(1.5, 0.25)) == S(1.5, 2.25);
  ok = ok && power(x, 2.0) == S(1.0, 8.0);       // 2^2 max(1, 2^1)
  ok = ok && power(x, 0.5) == S(0.25, std::sqrt(2.0));
  ok = ok && include(x, 1.0, 3.0) == S(1.0, 3.0);
  ok = ok && std::abs(hp_bound(S(1.0, 1.0), 2.0 / std::numbers::e) - 2.0 * std::numbers::e) <= 1e-15 * 2.0 * std::numbers::e;
  detail += ok ? "closures exact; " : "closure mismatch; ";

  struct Family {
    std::string name;
    NoiseModel model;
  };
  const std::vector<Family> families{{"gaussian", NoiseModel::gaussian(0.7)},
                                     {"uniform", NoiseModel::uniform(1.3)},
                                     {"weibull shape 1", NoiseModel::weibull(0.5, 1.0)},
                                     {"weibull shape 0.5", NoiseModel::weibull(0.5, 0.5)},
                                     {"weibull shape 2", NoiseModel::weibull(0.5, 2.0)}};
  for (const Family& f : families) {
    const SubWeibullParams env = coordinate_envelope(f.model);
    auto engine = make_engine({2024, 0, 0}, StreamPurpose::sampling);
    std::vector<double> xs(100000);
    for (double& v : xs) v = sample_with(f.model, 1, 0, engine)[0];
    double worst = 0.0;
    for (int k = 1; k <= 10; ++k) worst = std::max(worst, oracle::empirical_norm(xs, k) / (env.k() * std::pow(k, env.theta())));
    bool fam_ok = worst <= 1.1;
    std::string cov;
    for (const double delta : {0.1, 0.01}) {
      const double b = hp_bound(env, delta);
      const auto above = std::count_if(xs.begin(), xs.end(), [b](double v) { return std::abs(v) > b; });
      const double frac = static_cast<double>(above) / static_cast<double>(xs.size());
      fam_ok = fam_ok && frac <= delta;
      cov += " P(>" + num(b) + ")=" + num(frac);
    }
    ok = ok && fam_ok;
    detail += f.name + " theta " + num(env.theta()) + " moment ratio " + num(worst) + cov + "; ";
  }
  return {ok, detail};
}

// -- 7 --------------------------------------------------------------------
Outcome prox_oracles() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0), pos(0.05, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double step = pos(rng);
    const double w = pos(rng);
    // l1 in 1-D and 2-D
    const auto l1 = Regularizer<double>::l1(w);
    const double v1 = u(rng);
    const double g1 = oracle::grid_argmin_1d([&](double y) { return (y - v1) * (y - v1) / (2 * step) + w * std::abs(y); }, -20, 20);
    worst = std::max(worst, std::abs(prox(l1, step, Eigen::VectorXd::Constant(1, v1))[0] - g1));
    const Eigen::Vector2d v2(u(rng), u(rng));
    const Eigen::Vector2d g2 = oracle::grid_argmin_2d(
        [&](const Eigen::Vector2d& y) { return (y - v2).squaredNorm() / (2 * step) + w * y.lpNorm<1>(); },
        Eigen::Vector2d(-20, -20), Eigen::Vector2d(20, 20));
    worst = std::max(worst, (prox(l1, step, Eigen::VectorXd(v2)) - g2).lpNorm<Eigen::Infinity>());
    // box in 1-D and 2-D
    const double a = u(rng), b = a + pos(rng);
    const auto box1 = Regularizer<double>::box(Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b));
    const double h1 = oracle::grid_argmin_1d([&](double y) { return (y - v1) * (y - v1); }, a, b);
    worst = std::max(worst, std::abs(prox(box1, step, Eigen::VectorXd::Constant(1, v1))[0] - h1));
    const Eigen::Vector2d lo(u(rng), u(rng));
    const Eigen::Vector2d hi = lo + Eigen::Vector2d(pos(rng), pos(rng));
    const auto box2 = Regularizer<double>::box(lo, hi);
    const Eigen::Vector2d h2 = oracle::grid_argmin_2d([&](const Eigen::Vector2d& y) { return (y - v2).squaredNorm(); }, lo, hi);
    worst = std::max(worst, (prox(box2, step, Eigen::VectorXd(v2)) - h2).lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-6, "max |prox - grid argmin| = " + num(worst) + " over 100 instances per case"};
}

// -- 8 --------------------------------------------------------------------
Outcome longrun_plateau() {
  const RunSpec spec = preset_spec("static-ls", {{"horizon", "10000"}, {"trials", "20"}}, {{"family", "gaussian"}, {"scale", std::to_string(std::sqrt(1e-3))}});
  const AsymptoteReport rep = longrun_asymptote_check(spec.experiment, 5000);
  const OnlineProblem& p = *spec.experiment.problem;
  const double level = static_cast<double>(p.dimension()) * 1e-3 / (2.0 * p.pl_constant());
  return {rep.median_tail_max <= level,
          "median max_{t>5000} r_t = " + num(rep.median_tail_max) + " vs n sigma^2 / (2 mu) = " + num(level)};
}

// -- 9 --------------------------------------------------------------------
Outcome gradients() {
  double worst = 0.0;
  std::string detail;
  for (const std::string& name : preset_names()) {
    const RunSpec spec = preset_spec(name);
    const OnlineProblem& p = *spec.experiment.problem;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<long> time(0, p.horizon());
    double local = 0.0;
    for (int i = 0; i < 100; ++i) {
      VectorXd x(p.dimension());
      for (auto& xi : x) xi = normal(rng);
      x *= p.domain_radius() * std::pow(unit(rng), 1.0 / static_cast<double>(x.size())) / x.norm();
      const long t = time(rng);
      const VectorXd g = p.gradient(t, x);
      VectorXd fd(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
        VectorXd up = x, down = x;
        up[j] += h;
        down[j] -= h;
        fd[j] = (p.value(t, up) - p.value(t, down)) / (2 * h);
      }
      const double denom = std::max({g.lpNorm<Eigen::Infinity>(), fd.lpNorm<Eigen::Infinity>(), 1e-8});
      local = std::max(local, (g - fd).lpNorm<Eigen::Infinity>() / denom);
    }
    worst = std::max(worst, local);
    detail += name + " " + num(local) + "; ";
  }
  return {worst <= 1e-6, detail};
}

// -- 10 -------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "plgrad_acceptance_determinism";
  fs::remove_all(root);
  CliOptions o;
  o.preset = "fig1-ls";
  o.trials = 24;
  std::ostringstream out, err;
  int status = 0;
  const std::vector<std::pair<std::string, std::string>> runs{{"a", "1"}, {"b", "1"}, {"c", "4"}, {"d", "7"}};
  for (const auto& [dir, threads] : runs) {
    setenv("PLGRAD_THREADS", threads.c_str(), 1);
    o.out = root / dir;
    status |= cmd_run(o, out, err);
  }
  unsetenv("PLGRAD_THREADS");
  bool same = status == 0;
  for (const char* file : {"regret.csv", "bounds.csv", "summary.txt"}) {
    const std::string ref = slurp(root / "a" / file);
    same = same && !ref.empty();
    for (const char* dir : {"b", "c", "d"}) same = same && slurp(root / dir / file) == ref;
  }
  fs::remove_all(root);
  return {same, same ? "regret.csv, bounds.csv, summary.txt identical for PLGRAD_THREADS 1, 1, 4, 7"
                     : "outputs differ or run failed: " + err.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double limit_s;  // 0: no runtime limit
    std::function<Outcome()> run;
  };
  // 6 runs ahead of 4 so its trajectories are available.
  const std::vector<Criterion> order{
      {1, "noiseless linear convergence", 1, noiseless_contraction},
      {2, "expectation dominance and plateau (drifting least squares)", 30, figure1_dominance},
      {3, "high-probability coverage (static least squares)", 60, highprob_coverage},
      {6, "demand response: feasibility, dominance, two-decade drop", 60, demand_response},
      {4, "pathwise recursions", 0, pathwise_recursions},
      {5, "sub-Weibull algebra", 30, subweibull_suite},
      {7, "prox grid oracles", 5, prox_oracles},
      {8, "long-run plateau", 60, longrun_plateau},
      {9, "gradient finite differences", 5, gradients},
      {10, "determinism across thread counts", 0, determinism},
  };
  std::vector<std::string> lines(11);
  int failed = 0;
  for (const Criterion& c : order) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    char head[160];
    std::snprintf(head, sizeof head, "%s  [%2d] %s (%.2f s%s)", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                  in_time ? "" : ", over time limit");
    lines[static_cast<std::size_t>(c.id)] = std::string(head) + "\n        " + o.detail;
  }
  for (std::size_t i = 1; i < lines.size(); ++i) std::cout << lines[i] << '\n';
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << '\n';
  return failed ? 1 : 0;
}
