#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plgrad/problems.hpp"

namespace plgrad {
namespace {

ProblemConstants quadratic_constants(const QuadraticOptions& o) {
  const Eigen::Index n = o.curvature.size();
  if (n < 1 || o.center.size() != n) throw std::invalid_argument("quadratic needs matching curvature and center");
  if (!(o.curvature.array() > 0.0).all()) throw std::invalid_argument("quadratic curvature must be positive");
  ProblemConstants c;
  c.pl_constant = o.mu > 0.0 ? o.mu : o.curvature.minCoeff();
  c.smoothness = o.smoothness > 0.0 ? o.smoothness : o.curvature.maxCoeff();
  if (c.pl_constant > o.curvature.minCoeff() * (1.0 + 1e-15)) {
    throw std::invalid_argument("declared mu exceeds the smallest curvature");
  }
  if (c.smoothness < o.curvature.maxCoeff()) {
    throw std::invalid_argument("declared L is below the largest curvature");
  }
  c.domain_radius = o.radius > 0.0 ? o.radius : 10.0 * std::max(o.center.norm(), 1.0);
  c.diameter = 2.0 * c.domain_radius;
  if (o.regularizer && o.regularizer->kind() == RegularizerKind::box) {
    if (o.regularizer->lower().size() != n) throw std::invalid_argument("box dimension mismatch");
    c.diameter = *o.regularizer->diameter();
  }
  return c;
}

}  // namespace

StaticQuadratic::StaticQuadratic(QuadraticOptions o)
    : OnlineProblem(o.horizon, quadratic_constants(o)),
      curvature_(std::move(o.curvature)),
      center_(std::move(o.center)) {
  // Separable: each coordinate minimizes 1/2 h_i (x_i - c_i)^2 + g_i(x_i),
  // the prox of g_i with step 1 / h_i at c_i.
  minimizer_ = center_;
  if (o.regularizer) {
    for (Eigen::Index i = 0; i < center_.size(); ++i) {
      const double step = 1.0 / curvature_[i];
      switch (o.regularizer->kind()) {
        case RegularizerKind::none:
          break;
        case RegularizerKind::l1: {
          const double shrunk = std::abs(center_[i]) - step * o.regularizer->weight();
          minimizer_[i] = shrunk > 0.0 ? std::copysign(shrunk, center_[i]) : 0.0;
          break;
        }
        case RegularizerKind::box:
          minimizer_[i] = std::clamp(center_[i], o.regularizer->lower()[i], o.regularizer->upper()[i]);
          break;
      }
    }
    set_regularizer(*o.regularizer);
  }
  const double f_star = value(0, minimizer_) + (o.regularizer ? o.regularizer->value(minimizer_) : 0.0);
  set_optimal_values(std::vector<double>(static_cast<std::size_t>(o.horizon) + 1, f_star), true);
}

double StaticQuadratic::value(long t, const VectorXd& x) const {
  check_time(t);
  return 0.5 * (x - center_).cwiseAbs2().dot(curvature_);
}

VectorXd StaticQuadratic::gradient(long t, const VectorXd& x) const {
  check_time(t);
  return curvature_.cwiseProduct(x - center_);
}

std::optional<VectorXd> StaticQuadratic::minimizer(long t) const {
  check_time(t);
  return minimizer_;
}

}  // namespace plgrad
