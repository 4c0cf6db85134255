#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "plgrad/problems.hpp"
#include "random_matrix.hpp"

namespace plgrad {

LtiTracking::LtiTracking(const LtiOptions& o) : OnlineProblem(o.horizon, ProblemConstants{}) {
  if (o.n < 1 || o.m < 1) throw std::invalid_argument("LTI tracking requires n, m >= 1");
  if (!(o.disturbance_std >= 0.0) || !(o.reference_amplitude >= 0.0) || o.radius < 0.0) {
    throw std::invalid_argument("LTI tracking parameters must be nonnegative");
  }
  auto engine = make_engine({o.seed, 0, 0}, StreamPurpose::problem_build);
  const double gain_std = 1.0 / std::sqrt(static_cast<double>(o.m));
  g_ = detail::gaussian_matrix(o.m, o.n, gain_std, engine);
  h_ = detail::gaussian_matrix(o.m, o.m, gain_std, engine);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  VectorXd phase(o.m);
  for (int j = 0; j < o.m; ++j) phase[j] = phase_dist(engine);

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(g_.transpose() * g_, Eigen::EigenvaluesOnly);
  const VectorXd& ev = eig.eigenvalues();
  const double largest = ev.maxCoeff();
  double smallest_nonzero = largest;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > 1e-12 * largest) smallest_nonzero = std::min(smallest_nonzero, ev[i]);
  }

  const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(g_);
  std::vector<double> optimal;
  VectorXd w = VectorXd::Zero(o.m);
  double max_norm = 1.0;
  for (long t = 0; t <= o.horizon; ++t) {
    if (t > 0 && o.disturbance_std > 0.0) w += detail::gaussian_vector(o.m, o.disturbance_std, engine);
    VectorXd ref(o.m);
    for (int j = 0; j < o.m; ++j) {
      ref[j] = o.reference_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 100.0 + phase[j]);
    }
    const VectorXd target = ref - h_ * w;
    VectorXd x_star = cod.solve(target);
    optimal.push_back(0.5 * (g_ * x_star - target).squaredNorm());
    max_norm = std::max(max_norm, x_star.norm());
    w_.push_back(w);
    reference_.push_back(std::move(ref));
    minimizers_.push_back(std::move(x_star));
  }

  ProblemConstants c;
  c.smoothness = largest;
  c.pl_constant = smallest_nonzero;
  c.domain_radius = o.radius > 0.0 ? o.radius : 10.0 * max_norm;
  c.diameter = 2.0 * c.domain_radius;
  set_constants(c);
  set_optimal_values(std::move(optimal), true);
  set_noise_map(g_.transpose());
}

VectorXd LtiTracking::output(long t, const VectorXd& x) const {
  check_time(t);
  return g_ * x + h_ * w_[static_cast<std::size_t>(t)];
}

double LtiTracking::value(long t, const VectorXd& x) const {
  check_time(t);
  return 0.5 * (output(t, x) - reference_[static_cast<std::size_t>(t)]).squaredNorm();
}

VectorXd LtiTracking::gradient(long t, const VectorXd& x) const {
  check_time(t);
  return g_.transpose() * (output(t, x) - reference_[static_cast<std::size_t>(t)]);
}

VectorXd LtiTracking::measured_gradient(long t, const VectorXd& x, const VectorXd& nu) const {
  check_time(t);
  const VectorXd measured = output(t, x) + nu;
  return g_.transpose() * (measured - reference_[static_cast<std::size_t>(t)]);
}

std::optional<VectorXd> LtiTracking::minimizer(long t) const {
  check_time(t);
  return minimizers_[static_cast<std::size_t>(t)];
}

}  // namespace plgrad
