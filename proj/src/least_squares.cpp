#include <cmath>
#include <stdexcept>

#include "plgrad/problems.hpp"
#include "random_matrix.hpp"

namespace plgrad {
namespace {

ProblemConstants validate(const LeastSquaresOptions& o) {
  if (o.n < 1 || o.d < o.n) throw std::invalid_argument("least squares requires d >= n >= 1");
  if (!(o.mu > 0.0) || o.mu > o.smoothness) throw std::invalid_argument("least squares requires 0 < mu <= L");
  if (!(o.drift_std >= 0.0) || !(o.obs_noise_std >= 0.0)) {
    throw std::invalid_argument("least squares noise levels must be nonnegative");
  }
  if (o.radius < 0.0) throw std::invalid_argument("domain radius must be nonnegative");
  ProblemConstants c;
  if (o.spacing == SpectrumSpacing::eigenvalues) {
    c.smoothness = o.smoothness;
    c.pl_constant = o.mu;
  } else {
    c.smoothness = o.smoothness * o.smoothness;
    c.pl_constant = o.mu * o.mu;
  }
  c.domain_radius = o.radius > 0.0 ? o.radius : 10.0 * std::sqrt(static_cast<double>(o.n));
  c.diameter = 2.0 * c.domain_radius;
  return c;
}

}  // namespace

TimeVaryingLeastSquares::TimeVaryingLeastSquares(const LeastSquaresOptions& o)
    : OnlineProblem(o.horizon, validate(o)) {
  auto engine = make_engine({o.seed, 0, 0}, StreamPurpose::problem_build);
  const MatrixXd u = detail::random_orthogonal(o.d, engine);
  v_ = detail::random_orthogonal(o.n, engine);
  u_range_ = u.leftCols(o.n);

  singular_.resize(o.n);
  for (int i = 0; i < o.n; ++i) {
    const double frac = o.n == 1 ? 1.0 : static_cast<double>(i) / (o.n - 1);
    const double level = o.mu + frac * (o.smoothness - o.mu);
    singular_[i] = o.spacing == SpectrumSpacing::eigenvalues ? std::sqrt(level) : level;
  }
  a_ = u_range_ * singular_.asDiagonal() * v_.transpose();

  std::vector<double> optimal;
  optimal.reserve(static_cast<std::size_t>(o.horizon) + 1);
  VectorXd walk = VectorXd::Ones(o.n);
  for (long t = 0; t <= o.horizon; ++t) {
    if (t > 0 && o.drift_std > 0.0) walk += detail::gaussian_vector(o.n, o.drift_std, engine);
    VectorXd b = a_ * walk;
    if (o.obs_noise_std > 0.0) b += detail::gaussian_vector(o.d, o.obs_noise_std, engine);
    const VectorXd residual = b - u_range_ * (u_range_.transpose() * b);
    optimal.push_back(0.5 * residual.squaredNorm());
    walk_.push_back(walk);
    b_.push_back(std::move(b));
  }
  set_optimal_values(std::move(optimal), true);
  if (o.prox_handle) set_regularizer(Regularizer<double>::none());
}

const VectorXd& TimeVaryingLeastSquares::target(long t) const {
  check_time(t);
  return b_[static_cast<std::size_t>(t)];
}

const VectorXd& TimeVaryingLeastSquares::drifting_parameter(long t) const {
  check_time(t);
  return walk_[static_cast<std::size_t>(t)];
}

double TimeVaryingLeastSquares::value(long t, const VectorXd& x) const {
  return 0.5 * (a_ * x - target(t)).squaredNorm();
}

VectorXd TimeVaryingLeastSquares::gradient(long t, const VectorXd& x) const {
  return a_.transpose() * (a_ * x - target(t));
}

std::optional<VectorXd> TimeVaryingLeastSquares::minimizer(long t) const {
  return v_ * (u_range_.transpose() * target(t)).cwiseQuotient(singular_);
}

}  // namespace plgrad
