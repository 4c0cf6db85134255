#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "plgrad/problems.hpp"
#include "random_matrix.hpp"

namespace plgrad {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct LogisticCost {
  const MatrixXd& a;
  const VectorXd& b;

  double value(const VectorXd& x) const {
    const VectorXd z = (a * x).cwiseProduct(b);
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) total += softplus(z[i]);
    return total;
  }
  VectorXd gradient(const VectorXd& x) const {
    const VectorXd z = (a * x).cwiseProduct(b);
    VectorXd w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) w[i] = b[i] * sigmoid(z[i]);
    return a.transpose() * w;
  }
  MatrixXd hessian(const VectorXd& x) const {
    const VectorXd z = (a * x).cwiseProduct(b);
    VectorXd w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = sigmoid(z[i]);
      w[i] = s * (1.0 - s);
    }
    return a.transpose() * w.asDiagonal() * a;
  }
};

// Damped Newton with backtracking, stopped at ||grad|| <= 1e-10.
VectorXd newton_solve(const LogisticCost& cost, VectorXd x) {
  constexpr double tolerance = 1e-10;
  for (int iter = 0; iter < 200; ++iter) {
    const VectorXd g = cost.gradient(x);
    if (g.norm() <= tolerance) return x;
    const VectorXd step = cost.hessian(x).ldlt().solve(-g);
    const double f0 = cost.value(x);
    double alpha = 1.0;
    while (alpha > 1e-12 && cost.value(x + alpha * step) > f0 + 1e-4 * alpha * g.dot(step)) alpha *= 0.5;
    const VectorXd next = x + alpha * step;
    if (!next.allFinite()) break;
    if (next == x) {
      // No representable progress; accept if stationary up to rounding.
      if (g.norm() <= 1e3 * tolerance) return x;
      break;
    }
    x = next;
  }
  throw std::runtime_error(
      "logistic inner solve did not reach ||grad|| <= 1e-10; the data may be separable");
}

double logistic_curvature_floor(double z) {
  // sigma'(z) = sigma(z) (1 - sigma(z)), decreasing in |z|
  const double s = sigmoid(z);
  return s * (1.0 - s);
}

}  // namespace

OnlineLogistic::OnlineLogistic(const LogisticOptions& o)
    : OnlineProblem(o.horizon, ProblemConstants{}) {
  if (o.n < 1 || o.d < 1) throw std::invalid_argument("logistic requires n, d >= 1");
  if (!(o.drift_std >= 0.0)) throw std::invalid_argument("logistic drift must be nonnegative");
  if (!(o.radius > 0.0)) throw std::invalid_argument("logistic domain radius must be positive");

  auto engine = make_engine({o.seed, 0, 0}, StreamPurpose::problem_build);
  const double feature_std = 1.0 / std::sqrt(static_cast<double>(o.n));
  MatrixXd a = detail::gaussian_matrix(o.d, o.n, feature_std, engine);
  std::bernoulli_distribution coin(0.5);
  labels_.resize(o.d);
  for (int i = 0; i < o.d; ++i) labels_[i] = coin(engine) ? 1.0 : -1.0;

  double smooth = 0.0;
  double mu = std::numeric_limits<double>::infinity();
  std::vector<double> optimal;
  VectorXd warm = VectorXd::Zero(o.n);
  for (long t = 0; t <= o.horizon; ++t) {
    if (t > 0 && o.drift_std > 0.0) a += detail::gaussian_matrix(o.d, o.n, o.drift_std * feature_std, engine);
    features_.push_back(a);
    const LogisticCost cost{features_.back(), labels_};
    const VectorXd x_star = newton_solve(cost, warm);
    if (x_star.norm() >= o.radius) {
      throw std::runtime_error("logistic minimizer at t = " + std::to_string(t) +
                               " lies outside the domain ball; increase the radius");
    }
    warm = x_star;
    minimizers_.push_back(x_star);
    optimal.push_back(cost.value(x_star));

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
    smooth = std::max(smooth, 0.25 * eig.eigenvalues().maxCoeff());
    const double max_row = a.rowwise().norm().maxCoeff();
    mu = std::min(mu, eig.eigenvalues().minCoeff() * logistic_curvature_floor(max_row * o.radius));
  }
  if (!(mu > 0.0)) throw std::runtime_error("logistic features are rank deficient; no PL constant on the ball");
  ProblemConstants c;
  c.smoothness = smooth;
  c.pl_constant = std::min(mu, smooth);
  c.domain_radius = o.radius;
  c.diameter = 2.0 * o.radius;
  set_constants(c);
  set_optimal_values(std::move(optimal), false);
}

double OnlineLogistic::value(long t, const VectorXd& x) const {
  check_time(t);
  return LogisticCost{features_[static_cast<std::size_t>(t)], labels_}.value(x);
}

VectorXd OnlineLogistic::gradient(long t, const VectorXd& x) const {
  check_time(t);
  return LogisticCost{features_[static_cast<std::size_t>(t)], labels_}.gradient(x);
}

MatrixXd OnlineLogistic::hessian(long t, const VectorXd& x) const {
  check_time(t);
  return LogisticCost{features_[static_cast<std::size_t>(t)], labels_}.hessian(x);
}

std::optional<VectorXd> OnlineLogistic::minimizer(long t) const {
  check_time(t);
  return minimizers_[static_cast<std::size_t>(t)];
}

}  // namespace plgrad
