#include "plgrad/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace plgrad {

std::string_view to_string(SolverKind kind) { return kind == SolverKind::ogd ? "ogd" : "opgm"; }

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "ogd") return SolverKind::ogd;
  if (name == "opgm") return SolverKind::opgm;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected ogd or opgm)");
}

SolverState initial_state(const OnlineProblem& problem, VectorXd x0, const StepPolicy& policy) {
  if (x0.size() != problem.dimension()) throw std::invalid_argument("x0 has the wrong dimension");
  SolverState state;
  state.x = std::move(x0);
  state.step = 1.0 / problem.smoothness();
  if (policy.override_step) {
    if (!policy.outside_theory) {
      throw std::invalid_argument("step sizes other than 1/L are outside the theory; set outside_theory");
    }
    if (!(*policy.override_step > 0.0)) throw std::invalid_argument("step size must be positive");
    state.step = *policy.override_step;
  }
  return state;
}

namespace {

// Returns v_t and stores ||v_t - grad f_t(x_t)|| in error_norm.
VectorXd noisy_gradient(const SolverState& state, const OnlineProblem& problem, const NoiseModel& noise,
                        const StreamKey& key, double& error_norm) {
  const StreamKey step_key{key.seed, key.trial, static_cast<std::uint64_t>(state.t)};
  const VectorXd nu = sample(noise, problem.noise_dimension(), step_key);
  VectorXd v = problem.measured_gradient(state.t, state.x, nu);
  error_norm = (v - problem.gradient(state.t, state.x)).norm();
  return v;
}

}  // namespace

SolverState ogd_step(const SolverState& state, const OnlineProblem& problem, const NoiseModel& noise,
                     const StreamKey& key) {
  const auto* reg = problem.regularizer(state.t);
  if (reg && reg->kind() != RegularizerKind::none) {
    throw std::invalid_argument("ogd_step cannot handle a regularizer; use opgm_step");
  }
  SolverState next = state;
  const VectorXd v = noisy_gradient(state, problem, noise, key, next.last_error_norm);
  next.x = state.x - state.step * v;
  next.t = state.t + 1;
  return next;
}

SolverState opgm_step(const SolverState& state, const OnlineProblem& problem, const NoiseModel& noise,
                      const StreamKey& key) {
  const auto* reg = problem.regularizer(state.t);
  if (!reg) throw std::invalid_argument("opgm_step needs a prox handle (set the regularizer, possibly none)");
  SolverState next = state;
  const VectorXd v = noisy_gradient(state, problem, noise, key, next.last_error_norm);
  next.x = prox(*reg, state.step, state.x - state.step * v);
  next.t = state.t + 1;
  return next;
}

Trajectory run(const OnlineProblem& problem, SolverKind kind, const NoiseModel& noise, long horizon,
               const VectorXd& x0, const StreamKey& key, const RunOptions& options) {
  if (horizon < 0 || horizon > problem.horizon()) {
    throw std::invalid_argument("run horizon " + std::to_string(horizon) + " outside [0, " +
                                std::to_string(problem.horizon()) + "]");
  }
  if (!x0.allFinite() || x0.norm() >= problem.domain_radius()) {
    throw std::invalid_argument("x0 must lie in the open domain ball");
  }

  Trajectory traj;
  traj.kind = kind;
  traj.key = key;
  traj.optimal_exact = problem.optimal_value_exact();
  traj.steps.reserve(static_cast<std::size_t>(horizon) + 1);

  const auto regret_at = [&](long t, const VectorXd& x) {
    const double f_star = problem.optimal_value(t);
    const double r = problem.composite_value(t, x) - f_star;
    if (!std::isfinite(r) || !x.allFinite()) {
      throw std::runtime_error("non-finite iterate at t = " + std::to_string(t) + " (seed " +
                               std::to_string(key.seed) + ", trial " + std::to_string(key.trial) + ")");
    }
    if (r < -1e-6 * std::max(1.0, std::abs(f_star))) {
      throw std::runtime_error("regret " + std::to_string(r) + " at t = " + std::to_string(t) +
                               " is negative: optimal value oracle is inconsistent");
    }
    return r;
  };
  const auto monitor = [&](long t, const VectorXd& x) {
    if (x.norm() >= problem.domain_radius()) ++traj.domain_excursions;
    const auto* reg = problem.regularizer(t);
    if (reg && !reg->contains(x)) ++traj.infeasible_iterates;
    if (options.keep_iterates) traj.iterates.push_back(x);
  };

  SolverState state = initial_state(problem, x0, options.step);
  traj.steps.push_back({0, regret_at(0, state.x), 0.0, {}});
  monitor(0, state.x);

  double psi_bar = 0.0;
  for (long t = 0; t < horizon; ++t) {
    SolverState next = kind == SolverKind::ogd ? ogd_step(state, problem, noise, key)
                                               : opgm_step(state, problem, noise, key);
    traj.max_step_norm = std::max(traj.max_step_norm, (next.x - state.x).norm());
    const double r = regret_at(next.t, next.x);
    const VariabilityRecord var = variability(problem, next.t, next.x, psi_bar);
    psi_bar = var.psi_bar;
    traj.steps.push_back({next.t, r, next.last_error_norm, var});
    monitor(next.t, next.x);
    state = std::move(next);
  }
  return traj;
}

}  // namespace plgrad
