#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "plgrad/problems.hpp"
#include "plgrad/rng.hpp"

namespace plgrad {

DemandResponseTraces synthetic_demand_response_traces(int n_der, long horizon, std::uint64_t seed) {
  if (n_der < 1 || horizon < 0) throw std::invalid_argument("invalid demand response trace size");
  auto engine = make_engine({seed, 0, 0}, StreamPurpose::problem_build);
  std::normal_distribution<double> jitter(0.0, 2.0);
  const double size = static_cast<double>(n_der) / 20.0;
  const double two_pi = 2.0 * std::numbers::pi;

  DemandResponseTraces traces;
  traces.w.resize(horizon + 1, 2);
  traces.p_ref.resize(horizon + 1);
  for (long t = 0; t <= horizon; ++t) {
    const double td = static_cast<double>(t);
    const double load = 300.0 + 100.0 * std::sin(two_pi * td / 400.0) + 20.0 * std::sin(two_pi * td / 37.0);
    const double solar = 150.0 + 100.0 * std::sin(two_pi * td / 600.0);
    traces.w(t, 0) = size * (load + jitter(engine));
    traces.w(t, 1) = -size * (solar + jitter(engine));
    traces.p_ref[t] = size * (500.0 + 150.0 * std::sin(two_pi * td / 250.0 + 0.5));
  }
  return traces;
}

std::pair<VectorXd, VectorXd> default_der_bounds(int n_der) {
  if (n_der < 1) throw std::invalid_argument("need at least one DER");
  VectorXd lo(n_der);
  VectorXd hi = VectorXd::Constant(n_der, 50.0);
  const int storage = (n_der + 1) / 2;
  for (int i = 0; i < n_der; ++i) lo[i] = i < storage ? -50.0 : 0.0;
  return {lo, hi};
}

namespace {

ProblemConstants dr_constants(const DemandResponseOptions& o, const VectorXd& a_x) {
  const double l = a_x.squaredNorm();
  const double a_min_sq = a_x.cwiseAbs2().minCoeff();
  ProblemConstants c;
  c.smoothness = l;
  c.pl_constant = std::min(a_min_sq, 0.5 * l);
  c.domain_radius = o.lo.cwiseAbs().cwiseMax(o.hi.cwiseAbs()).norm();
  c.diameter = (o.hi - o.lo).norm();
  return c;
}

VectorXd default_ones(const VectorXd& v, Eigen::Index n) {
  return v.size() == 0 ? VectorXd::Ones(n) : v;
}

}  // namespace

DemandResponse::DemandResponse(DemandResponseOptions o)
    : OnlineProblem(o.horizon, ProblemConstants{}) {
  const Eigen::Index n = o.lo.size();
  if (n < 1 || o.hi.size() != n) throw std::invalid_argument("DER bounds must be nonempty and equal in size");
  if (!(o.lo.array() < o.hi.array()).all()) throw std::invalid_argument("DER bounds require lo < hi");
  if (o.traces.w.rows() < o.horizon + 1 || o.traces.p_ref.size() < o.horizon + 1) {
    throw std::invalid_argument("demand response traces shorter than the horizon");
  }
  if (o.traces.w.rows() != o.traces.p_ref.size()) {
    throw std::invalid_argument("demand response traces have inconsistent lengths");
  }
  a_x_ = default_ones(o.a_x, n);
  const VectorXd a_w = default_ones(o.a_w, o.traces.w.cols());
  if (a_x_.size() != n || a_w.size() != o.traces.w.cols()) {
    throw std::invalid_argument("sensitivity vectors do not match the DER count or trace width");
  }
  if ((a_x_.array() == 0.0).any()) throw std::invalid_argument("a_x entries must be nonzero");

  set_constants(dr_constants(o, a_x_));
  uncontrolled_ = o.traces.w.topRows(o.horizon + 1) * a_w;
  p_ref_ = o.traces.p_ref.head(o.horizon + 1);
  set_regularizer(Regularizer<double>::box(o.lo, o.hi));
  set_noise_map(a_x_);

  const auto [range_lo, range_hi] = reachable_range();
  std::vector<double> optimal;
  for (long t = 0; t <= o.horizon; ++t) {
    const double c = target(t);
    const double gap = std::max({range_lo - c, 0.0, c - range_hi});
    optimal.push_back(0.5 * gap * gap);
  }
  set_optimal_values(std::move(optimal), true);
}

std::pair<double, double> DemandResponse::reachable_range() const {
  const auto* box = regularizer(0);
  const VectorXd at_lo = a_x_.cwiseProduct(box->lower());
  const VectorXd at_hi = a_x_.cwiseProduct(box->upper());
  return {at_lo.cwiseMin(at_hi).sum(), at_lo.cwiseMax(at_hi).sum()};
}

double DemandResponse::target(long t) const {
  check_time(t);
  return p_ref_[t] - uncontrolled_[t];
}

double DemandResponse::net_power(long t, const VectorXd& x) const {
  check_time(t);
  return a_x_.dot(x) + uncontrolled_[t];
}

double DemandResponse::value(long t, const VectorXd& x) const {
  const double residual = net_power(t, x) - p_ref_[t];
  return 0.5 * residual * residual;
}

VectorXd DemandResponse::gradient(long t, const VectorXd& x) const {
  return a_x_ * (net_power(t, x) - p_ref_[t]);
}

VectorXd DemandResponse::measured_gradient(long t, const VectorXd& x, const VectorXd& nu) const {
  const double measured = net_power(t, x) + nu[0];
  return a_x_ * (measured - p_ref_[t]);
}

}  // namespace plgrad
