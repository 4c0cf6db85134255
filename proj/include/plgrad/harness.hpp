#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plgrad/bounds.hpp"
#include "plgrad/noise.hpp"
#include "plgrad/problems.hpp"
#include "plgrad/solvers.hpp"

namespace plgrad {

/// Where the per-step error statistics behind the bounds come from.
enum class BoundInputMode {
  empirical,  // means of ||e_t||, ||e_t||^2 and psi_tilde pooled across trials
  analytic,   // exact moments of the noise model
};

/// Where the sub-Weibull constant K_t of ||e_t|| comes from.
enum class EnvelopeMode {
  analytic,  // closed-form moments of the noise family
  fitted,    // fit_from_samples over fresh draws of ||M nu||
};

struct ExperimentConfig {
  std::shared_ptr<const OnlineProblem> problem;
  SolverKind solver = SolverKind::ogd;
  NoiseModel noise;
  long horizon = 500;
  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<double> deltas{0.1, 0.05};
  BoundInputMode bound_inputs = BoundInputMode::empirical;
  EnvelopeMode envelope = EnvelopeMode::analytic;
  double envelope_scale = 1.0;    // multiplies every K_t; below 1 only for negative controls
  std::optional<double> psi_bar;  // supplied bound on psi_t; otherwise measured
  std::optional<VectorXd> x0;     // zero vector when unset
  StepPolicy step;
  int threads = 0;                // 0: PLGRAD_THREADS, else hardware concurrency
  long fit_samples = 100000;

  void validate() const;
};

/// Worker count for a config: threads if positive, else PLGRAD_THREADS if
/// set, else the hardware concurrency; never more than the trial count.
int resolve_threads(int requested, int trials);

struct AggregateReport {
  SolverKind solver = SolverKind::ogd;
  long horizon = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  double zeta = 0.0;
  double r0 = 0.0;
  double theta = 0.5;

  // Per t = 0..T across trials.
  std::vector<double> mean;
  std::vector<double> std;            // sample standard deviation; 0 when R = 1
  std::vector<double> band_lo;        // mean - 3 std
  std::vector<double> band_hi;        // mean + 3 std
  std::vector<double> mean_band_lo;   // mean - 3 std / sqrt(R)
  std::vector<double> mean_band_hi;   // mean + 3 std / sqrt(R)

  // Per step t = 0..T-1 (error e_t, variability psi_{t+1}).
  std::vector<double> mean_error_sq;
  std::vector<double> mean_error;
  std::vector<double> mean_psi;
  std::vector<double> max_psi;
  std::vector<double> envelope_ks;

  BoundSeries expectation;            // the selected input mode
  BoundSeries expectation_empirical;
  BoundSeries expectation_analytic;
  std::vector<BoundSeries> highprob;  // one per delta
  std::vector<BoundSeries> markov;    // one per delta

  double e_bar = 0.0;                 // sup_t E||e_t||^2 of the noise model
  double psi_bar = 0.0;
  bool psi_bar_measured = true;       // empirical sup over the observed horizon
  double asymptote = 0.0;

  double max_recursion_violation = 0.0;  // max of r_{t+1} - (pathwise right-hand side)
  long recursion_steps = 0;
  long recursion_failures = 0;           // steps with violation above 1e-9
  int infeasible_iterates = 0;
  int domain_excursions = 0;
  double max_step_norm = 0.0;
  bool optimal_exact = true;

  std::vector<Trajectory> trajectories;  // in trial order
};

/// Runs config.trials independent trials, trial i on stream key
/// (seed, i, t), and aggregates them in trial order. The report does not
/// depend on the number of worker threads.
AggregateReport run_experiment(const ExperimentConfig& config);

/// One pass/fail line of a validation table.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CoverageRecord {
  double delta = 0.0;
  long t = 0;
  int violations = 0;
  int trials = 0;
  int allowed = 0;  // binomial 99% upper quantile
};

struct ValidationSummary {
  std::vector<CheckResult> checks;
  std::vector<CoverageRecord> coverage;
  bool all_pass() const;
};

/// Smallest k with P(Binomial(n, p) <= k) >= level.
int binomial_upper_quantile(int n, double p, double level = 0.99);

/// Expectation dominance, pathwise recursion, high-probability coverage at
/// t in {T/4, T/2, T} for each delta, and box feasibility.
ValidationSummary validate_bounds(const AggregateReport& report);

struct AsymptoteReport {
  double asymptote = 0.0;
  double e_bar = 0.0;
  double psi_bar = 0.0;
  bool psi_bar_measured = true;
  std::vector<double> tail_max;  // max_{t > burn_in} r_t per trial
  double median_tail_max = 0.0;
  double fraction_exceeding = 0.0;
};

/// Long-run comparison of the regret tail with the asymptotic level.
AsymptoteReport longrun_asymptote_check(const ExperimentConfig& config, long burn_in);

}  // namespace plgrad
