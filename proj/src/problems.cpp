#include "plgrad/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "plgrad/rng.hpp"

namespace plgrad {

OnlineProblem::OnlineProblem(long horizon, ProblemConstants constants) : horizon_(horizon) {
  if (horizon < 0) throw std::invalid_argument("problem horizon must be nonnegative");
  set_constants(constants);
}

void OnlineProblem::set_constants(ProblemConstants constants) {
  if (!(constants.smoothness > 0.0)) throw std::invalid_argument("smoothness constant must be positive");
  if (!(constants.pl_constant > 0.0)) throw std::invalid_argument("PL constant must be positive");
  if (constants.pl_constant > constants.smoothness) {
    throw std::invalid_argument("PL constant exceeds the smoothness constant");
  }
  if (!(constants.domain_radius > 0.0) || !(constants.diameter > 0.0)) {
    throw std::invalid_argument("domain radius and diameter must be positive");
  }
  constants_ = constants;
}

void OnlineProblem::set_optimal_values(std::vector<double> values, bool exact) {
  if (values.size() != static_cast<std::size_t>(horizon_) + 1) {
    throw std::logic_error("optimal values must cover t = 0..horizon");
  }
  for (const double v : values) {
    if (!std::isfinite(v)) throw std::runtime_error("optimal value is not finite");
  }
  optimal_values_ = std::move(values);
  optimal_exact_ = exact;
}

void OnlineProblem::check_time(long t) const {
  if (t < 0 || t > horizon_) {
    throw std::out_of_range("time index " + std::to_string(t) + " outside [0, " +
                            std::to_string(horizon_) + "]");
  }
}

const Regularizer<double>* OnlineProblem::regularizer(long t) const {
  check_time(t);
  return regularizer_ ? &*regularizer_ : nullptr;
}

double OnlineProblem::composite_value(long t, const VectorXd& x) const {
  const double f = value(t, x);
  const auto* reg = regularizer(t);
  return reg ? f + reg->value(x) : f;
}

double OnlineProblem::optimal_value(long t) const {
  check_time(t);
  return optimal_values_.at(static_cast<std::size_t>(t));
}

Eigen::Index OnlineProblem::noise_dimension() const {
  return noise_map_ ? noise_map_->cols() : dimension();
}

MatrixXd OnlineProblem::noise_map() const {
  return noise_map_ ? *noise_map_ : MatrixXd::Identity(dimension(), dimension());
}

VectorXd OnlineProblem::measured_gradient(long t, const VectorXd& x, const VectorXd& nu) const {
  if (noise_map_) return gradient(t, x) + *noise_map_ * nu;
  return gradient(t, x) + nu;
}

// ---------------------------------------------------------------------------

VariabilityRecord variability(const OnlineProblem& problem, long t, const VectorXd& x,
                              double psi_bar_so_far) {
  if (t < 1) throw std::invalid_argument("variability is defined for t >= 1");
  VariabilityRecord rec;
  rec.sigma = std::abs(problem.optimal_value(t) - problem.optimal_value(t - 1));
  rec.phi_tilde = std::abs(problem.composite_value(t, x) - problem.composite_value(t - 1, x));
  rec.psi_tilde = rec.sigma + rec.phi_tilde;
  rec.psi_bar = std::max(psi_bar_so_far, rec.psi_tilde);
  return rec;
}

VectorXd sample_ball(Eigen::Index n, double radius, std::uint64_t seed, std::uint64_t index) {
  auto engine = make_engine({seed, index, 0}, StreamPurpose::sampling);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  VectorXd dir(n);
  for (Eigen::Index i = 0; i < n; ++i) dir[i] = normal(engine);
  const double norm = dir.norm();
  if (norm == 0.0) return VectorXd::Zero(n);
  const double rho = radius * std::pow(uniform(engine), 1.0 / static_cast<double>(n));
  return dir * (rho / norm);
}

PlReport verify_pl(const OnlineProblem& problem, long t, int n_samples, std::uint64_t seed) {
  if (n_samples <= 0) throw std::invalid_argument("verify_pl needs at least one sample");
  const auto* reg = problem.regularizer(t);
  if (reg && reg->kind() != RegularizerKind::none) {
    throw std::invalid_argument("verify_pl applies to smooth costs only; use verify_prox_pl");
  }
  const double f_star = problem.optimal_value(t);
  const double mu = problem.pl_constant();
  const double floor = 1e-12 * std::max(1.0, std::abs(f_star));

  PlReport report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  report.mu_hat = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const VectorXd x = sample_ball(problem.dimension(), problem.domain_radius(), seed,
                                   static_cast<std::uint64_t>(i));
    const double gap = problem.value(t, x) - f_star;
    const double grad_sq = problem.gradient(t, x).squaredNorm();
    if (gap <= floor) {
      ++report.samples_skipped;
      continue;
    }
    ++report.samples_used;
    report.max_violation = std::max(report.max_violation, 2.0 * mu * gap - grad_sq);
    report.mu_hat = std::min(report.mu_hat, grad_sq / (2.0 * gap));
  }
  if (report.samples_used == 0) {
    report.max_violation = 0.0;
    report.mu_hat = std::numeric_limits<double>::infinity();
  }
  return report;
}

namespace {

// Minimizes q over the axis-aligned box [lo, hi] on a grid with `res`
// points per axis, then repeatedly zooms in around the best point.
template <typename Objective>
VectorXd grid_minimize(const Objective& q, VectorXd lo, VectorXd hi, int res, int passes) {
  const Eigen::Index n = lo.size();
  VectorXd best = 0.5 * (lo + hi);
  double best_val = q(best);
  for (int pass = 0; pass < passes; ++pass) {
    VectorXd cell = (hi - lo) / static_cast<double>(res - 1);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    VectorXd y(n);
    while (true) {
      for (Eigen::Index i = 0; i < n; ++i) y[i] = lo[i] + cell[i] * idx[static_cast<std::size_t>(i)];
      const double v = q(y);
      if (v < best_val) {
        best_val = v;
        best = y;
      }
      Eigen::Index axis = 0;
      while (axis < n && ++idx[static_cast<std::size_t>(axis)] == res) {
        idx[static_cast<std::size_t>(axis)] = 0;
        ++axis;
      }
      if (axis == n) break;
    }
    const VectorXd new_lo = (best - 2.0 * cell).cwiseMax(lo);
    const VectorXd new_hi = (best + 2.0 * cell).cwiseMin(hi);
    lo = new_lo;
    hi = new_hi;
  }
  return best;
}

}  // namespace

ProxPlReport verify_prox_pl(const OnlineProblem& problem, long t, const VectorXd& x,
                            int grid_resolution) {
  const Eigen::Index n = problem.dimension();
  if (n > 3) throw std::invalid_argument("verify_prox_pl grid search supports n <= 3");
  if (grid_resolution < 3) throw std::invalid_argument("grid resolution must be at least 3");

  const auto* reg = problem.regularizer(t);
  const Regularizer<double> zero = Regularizer<double>::none();
  const Regularizer<double>& g = reg ? *reg : zero;
  const double g_x = g.value(x);
  if (!std::isfinite(g_x)) throw std::invalid_argument("verify_prox_pl: x outside dom g");

  const double L = problem.smoothness();
  const VectorXd grad = problem.gradient(t, x);
  const auto q = [&](const VectorXd& y) {
    return grad.dot(y - x) + 0.5 * L * (y - x).squaredNorm() + g.value(y) - g_x;
  };

  const double l1 = g.kind() == RegularizerKind::l1 ? g.weight() * std::sqrt(static_cast<double>(n)) : 0.0;
  const double reach = 1.01 * (grad.norm() + l1) / L + 1e-12;
  VectorXd lo = x.array() - reach;
  VectorXd hi = x.array() + reach;
  if (g.kind() == RegularizerKind::box) {
    lo = lo.cwiseMax(g.lower());
    hi = hi.cwiseMin(g.upper());
  }

  ProxPlReport report;
  report.grid_minimizer = grid_minimize(q, lo, hi, grid_resolution, 6);
  report.rhs = -2.0 * L * std::min(0.0, q(report.grid_minimizer));
  report.lhs = 2.0 * problem.pl_constant() * (problem.composite_value(t, x) - problem.optimal_value(t));
  return report;
}

double gradient_fd_error(const OnlineProblem& problem, long t, const VectorXd& x, double step,
                         double floor) {
  const VectorXd g = problem.gradient(t, x);
  VectorXd fd(x.size());
  VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = problem.value(t, probe);
    probe[i] = x[i] - h;
    const double down = problem.value(t, probe);
    probe[i] = x[i];
    fd[i] = (up - down) / (2.0 * h);
  }
  const double scale = std::max({g.lpNorm<Eigen::Infinity>(), fd.lpNorm<Eigen::Infinity>(), floor});
  return (g - fd).lpNorm<Eigen::Infinity>() / scale;
}

}  // namespace plgrad
