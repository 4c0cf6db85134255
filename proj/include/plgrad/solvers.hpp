#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

#include "plgrad/noise.hpp"
#include "plgrad/problems.hpp"
#include "plgrad/rng.hpp"

namespace plgrad {

enum class SolverKind { ogd, opgm };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

struct SolverState {
  VectorXd x;                   // x_t
  long t = 0;
  double step = 1.0;            // 1 / L unless explicitly overridden
  double last_error_norm = 0.0; // ||e_{t-1}||
};

/// Step-size policy. Both certificates assume 1 / L; any other step must be
/// requested explicitly and is reported as outside the theory.
struct StepPolicy {
  std::optional<double> override_step;
  bool outside_theory = false;
};

SolverState initial_state(const OnlineProblem& problem, VectorXd x0, const StepPolicy& policy = {});

/// x_{t+1} = x_t - step (grad f_t(x_t) + e_t). The noise stream is keyed by
/// (key.seed, key.trial, state.t).
SolverState ogd_step(const SolverState& state, const OnlineProblem& problem, const NoiseModel& noise,
                     const StreamKey& key);

/// x_{t+1} = prox_{step g_t}(x_t - step v_t).
SolverState opgm_step(const SolverState& state, const OnlineProblem& problem, const NoiseModel& noise,
                      const StreamKey& key);

struct StepRecord {
  long t = 0;
  double regret = 0.0;      // F_t(x_t) - F_t^*, unclipped
  double error_norm = 0.0;  // ||e_{t-1}||; zero at t = 0
  VariabilityRecord variability;  // zero at t = 0
};

struct Trajectory {
  SolverKind kind = SolverKind::ogd;
  StreamKey key;
  std::vector<StepRecord> steps;  // t = 0, ..., horizon
  std::vector<VectorXd> iterates; // filled when RunOptions::keep_iterates
  double max_step_norm = 0.0;     // max ||x_{t+1} - x_t||
  int domain_excursions = 0;      // iterates with ||x_t|| >= r
  int infeasible_iterates = 0;    // iterates outside a box indicator's box
  bool optimal_exact = true;
};

struct RunOptions {
  bool keep_iterates = true;
  StepPolicy step;
};

/// Runs `horizon` steps from x0 and records the regret of every iterate.
/// Throws std::runtime_error on a non-finite iterate or on regret below
/// -1e-6 max(1, |F_t^*|), which means the F_t^* oracle is inconsistent.
Trajectory run(const OnlineProblem& problem, SolverKind kind, const NoiseModel& noise, long horizon,
               const VectorXd& x0, const StreamKey& key, const RunOptions& options = {});

}  // namespace plgrad
