#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "oracles.hpp"
#include "plgrad/noise.hpp"
#include "plgrad/problems.hpp"
#include "plgrad/subweibull.hpp"

using namespace plgrad;

namespace {

std::shared_ptr<DemandResponse> small_demand_response(int n_der, long horizon) {
  DemandResponseOptions o;
  std::tie(o.lo, o.hi) = default_der_bounds(n_der);
  o.traces = synthetic_demand_response_traces(n_der, horizon, 3);
  o.horizon = horizon;
  return std::make_shared<DemandResponse>(std::move(o));
}

std::vector<std::shared_ptr<const OnlineProblem>> all_problems() {
  LeastSquaresOptions ls;
  ls.drift_std = std::sqrt(0.1);
  ls.obs_noise_std = std::sqrt(1e-3);
  ls.horizon = 50;
  LogisticOptions lg;
  lg.drift_std = 0.05;
  lg.radius = 4.0;
  lg.horizon = 20;
  LtiOptions lti;
  lti.horizon = 50;
  QuadraticOptions q;
  q.curvature = Eigen::Vector2d(0.5, 2.0);
  q.center = Eigen::Vector2d(1.0, -0.3);
  q.regularizer = Regularizer<double>::l1(0.2);
  return {std::make_shared<TimeVaryingLeastSquares>(ls), std::make_shared<OnlineLogistic>(lg),
          std::make_shared<LtiTracking>(lti), small_demand_response(20, 50),
          std::make_shared<StaticQuadratic>(q)};
}

}  // namespace

TEST_CASE("least squares spectrum matches the requested grid") {
  LeastSquaresOptions o;
  o.horizon = 5;
  const TimeVaryingLeastSquares p(o);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.matrix().transpose() * p.matrix());
  const Eigen::VectorXd ev = eig.eigenvalues();  // ascending
  for (int i = 0; i < o.n; ++i) CHECK(ev[i] == doctest::Approx(0.1 + i * 0.9 / 9.0).epsilon(1e-10));
  CHECK(p.pl_constant() == 0.1);
  CHECK(p.smoothness() == 1.0);

  o.spacing = SpectrumSpacing::singular_values;
  const TimeVaryingLeastSquares q(o);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.matrix());
  const Eigen::VectorXd sv = svd.singularValues();  // descending
  for (int i = 0; i < o.n; ++i) CHECK(sv[o.n - 1 - i] == doctest::Approx(0.1 + i * 0.9 / 9.0).epsilon(1e-10));
  CHECK(q.pl_constant() == doctest::Approx(0.01));
  CHECK(q.smoothness() == doctest::Approx(1.0));
}

TEST_CASE("least squares optimal values agree with a QR solve") {
  LeastSquaresOptions o;
  o.drift_std = std::sqrt(0.1);
  o.obs_noise_std = std::sqrt(1e-3);
  o.horizon = 20;
  const TimeVaryingLeastSquares p(o);
  for (long t = 0; t <= 20; t += 5) {
    const Eigen::VectorXd x = p.matrix().colPivHouseholderQr().solve(p.target(t));
    CHECK(p.optimal_value(t) == doctest::Approx(p.value(t, x)).epsilon(1e-10).scale(1e-12));
    CHECK((*p.minimizer(t) - x).norm() <= 1e-9);
  }
}

TEST_CASE("static least squares has no variability") {
  LeastSquaresOptions o;
  o.horizon = 10;
  const TimeVaryingLeastSquares p(o);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(10, 0.3);
  for (long t = 1; t <= 10; ++t) {
    const VariabilityRecord v = variability(p, t, x);
    CHECK(v.sigma == 0.0);
    CHECK(v.phi_tilde == 0.0);
    CHECK(v.psi_tilde == 0.0);
  }
}

TEST_CASE("variability of a drifting least squares problem") {
  LeastSquaresOptions o;
  o.drift_std = 0.5;
  o.horizon = 5;
  const TimeVaryingLeastSquares p(o);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(10, -0.2);
  const VariabilityRecord v = variability(p, 3, x, 0.0);
  const double direct = std::abs(0.5 * (p.matrix() * x - p.target(3)).squaredNorm() -
                                 0.5 * (p.matrix() * x - p.target(2)).squaredNorm());
  CHECK(v.phi_tilde == doctest::Approx(direct).epsilon(1e-13));
  CHECK(v.sigma == doctest::Approx(std::abs(p.optimal_value(3) - p.optimal_value(2))));
  CHECK(v.psi_tilde == v.sigma + v.phi_tilde);
  CHECK(v.psi_bar == v.psi_tilde);
  CHECK(variability(p, 3, x, 1e9).psi_bar == 1e9);
  CHECK_THROWS_AS(variability(p, 0, x), std::invalid_argument);
}

TEST_CASE("PL verification") {
  LeastSquaresOptions o;
  o.horizon = 2;
  const TimeVaryingLeastSquares p(o);
  const PlReport r = verify_pl(p, 1, 500, 11);
  CHECK(r.samples_used > 0);
  CHECK(r.max_violation <= 1e-9);
  CHECK(r.mu_hat >= 0.1 - 1e-9);

  QuadraticOptions q;
  q.curvature = Eigen::VectorXd::Constant(3, 0.4);
  q.center = Eigen::VectorXd::Zero(3);
  const StaticQuadratic quad(q);
  const PlReport rq = verify_pl(quad, 0, 200, 5);
  CHECK(rq.mu_hat == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("quadratic growth holds around known minimizers") {
  for (const auto& p : all_problems()) {
    if (p->regularizer(0) && p->regularizer(0)->kind() != RegularizerKind::none) continue;
    for (long t : {0L, 5L}) {
      const auto xs = p->minimizer(t);
      if (!xs) continue;
      for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXd x = sample_ball(p->dimension(), p->domain_radius(), 17, static_cast<std::uint64_t>(i));
        CAPTURE(p->name());
        CHECK(p->value(t, x) - p->optimal_value(t) >= 0.5 * p->pl_constant() * (x - *xs).squaredNorm() - 1e-9);
      }
    }
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  for (const auto& p : all_problems()) {
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd x = sample_ball(p->dimension(), p->domain_radius(), 23, static_cast<std::uint64_t>(i));
      CAPTURE(p->name());
      CHECK(gradient_fd_error(*p, i % (p->horizon() + 1), x) <= 1e-6);
    }
  }
}

TEST_CASE("logistic cost at the origin is d log 2") {
  LogisticOptions o;
  o.horizon = 3;
  o.radius = 4.0;
  const OnlineLogistic p(o);
  CHECK(p.value(0, Eigen::VectorXd::Zero(o.n)) == doctest::Approx(o.d * std::log(2.0)));
  CHECK(p.gradient(2, *p.minimizer(2)).norm() <= 1e-9);
  CHECK_FALSE(p.optimal_value_exact());
}

TEST_CASE("static logistic has no variability") {
  LogisticOptions o;
  o.horizon = 4;
  o.radius = 4.0;
  const OnlineLogistic p(o);
  for (long t = 1; t <= 4; ++t) CHECK(variability(p, t, Eigen::VectorXd::Constant(o.n, 0.1)).sigma == 0.0);
}

TEST_CASE("LTI constants are the extreme nonzero eigenvalues of G^T G") {
  LtiOptions o;
  o.horizon = 3;
  const LtiTracking p(o);
  const Eigen::MatrixXd gtg = p.output_map().transpose() * p.output_map();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gtg);
  CHECK(p.smoothness() == doctest::Approx(eig.eigenvalues().maxCoeff()));
  double smallest = std::numeric_limits<double>::infinity();
  for (const double ev : eig.eigenvalues()) {
    if (ev > 1e-10 * eig.eigenvalues().maxCoeff()) smallest = std::min(smallest, ev);
  }
  CHECK(p.pl_constant() == doctest::Approx(smallest));
}

TEST_CASE("LTI gradient estimate") {
  LtiOptions o;
  o.horizon = 3;
  o.disturbance_std = 0.0;
  o.reference_amplitude = 0.0;
  const LtiTracking p(o);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(o.n, -1.0, 1.0);
  const Eigen::MatrixXd& g = p.output_map();
  CHECK((p.measured_gradient(1, x, Eigen::VectorXd::Zero(o.m)) - g.transpose() * g * x).norm() <= 1e-12);
  const Eigen::VectorXd nu = Eigen::VectorXd::LinSpaced(o.m, 0.5, -0.5);
  CHECK((p.measured_gradient(1, x, nu) - p.gradient(1, x) - g.transpose() * nu).norm() <= 1e-12);
  CHECK((p.noise_map() - g.transpose()).norm() == 0.0);
}

TEST_CASE("LTI gradient error envelope against sampled fit") {
  LtiOptions o;
  o.horizon = 1;
  const LtiTracking p(o);
  const NoiseModel m = NoiseModel::gaussian(0.1);
  auto engine = make_engine({8, 0, 0}, StreamPurpose::sampling);
  std::vector<double> norms(100000);
  for (double& v : norms) v = (p.noise_map() * sample_with(m, o.m, 0, engine)).norm();
  const double fitted = fit_from_samples<double>(norms, 0.5).k();
  const double top = p.output_map().jacobiSvd().singularValues()(0);
  CHECK(envelope_mapped(m, p.noise_map()).k() >= fitted * 0.98);
  CHECK(fitted <= top * 0.1 * std::sqrt(static_cast<double>(o.m)));
}

TEST_CASE("demand response optimal values") {
  const auto p = small_demand_response(20, 60);
  const auto [lo, hi] = p->reachable_range();
  CHECK(lo == doctest::Approx(-500.0));
  CHECK(hi == doctest::Approx(1000.0));
  for (long t = 0; t <= 60; ++t) {
    const double target = p->target(t);
    // Grid over the reachable net power a_x^T x.
    const double s = oracle::grid_argmin_1d([&](double y) { return 0.5 * (y - target) * (y - target); }, lo, hi);
    CHECK(p->optimal_value(t) == doctest::Approx(0.5 * (s - target) * (s - target)).epsilon(1e-8).scale(1e-6));
    if (target >= lo && target <= hi) CHECK(p->optimal_value(t) == 0.0);
  }
}

TEST_CASE("demand response constants") {
  DemandResponseOptions o;
  o.lo = Eigen::VectorXd::Constant(20, -50.0);
  o.hi = Eigen::VectorXd::Constant(20, 50.0);
  o.traces = synthetic_demand_response_traces(20, 10, 1);
  o.horizon = 10;
  const DemandResponse p(o);
  CHECK(p.diameter() == doctest::Approx(100.0 * std::sqrt(20.0)));
  CHECK(p.diameter() == doctest::Approx(447.21).epsilon(1e-5));
  CHECK(p.smoothness() == doctest::Approx(20.0));
  CHECK(p.pl_constant() == doctest::Approx(1.0));
  CHECK(p.regularizer(0)->kind() == RegularizerKind::box);
}

TEST_CASE("demand response traces are shaped for the DER count") {
  const auto traces = synthetic_demand_response_traces(20, 100, 1);
  CHECK(traces.w.rows() == 101);
  CHECK(traces.p_ref.size() == 101);
  const auto [lo, hi] = default_der_bounds(4);
  CHECK(lo[0] == -50.0);
  CHECK(lo[3] == 0.0);
  CHECK(hi.maxCoeff() == 50.0);
}

TEST_CASE("proximal-PL verification") {
  SUBCASE("g = 0 reduces to the PL inequality") {
    LeastSquaresOptions o;
    o.n = 2;
    o.d = 3;
    o.horizon = 1;
    o.prox_handle = true;
    const TimeVaryingLeastSquares p(o);
    const Eigen::VectorXd x = Eigen::Vector2d(0.7, -1.3);
    const ProxPlReport r = verify_prox_pl(p, 0, x, 41);
    const Eigen::VectorXd g = p.gradient(0, x);
    CHECK((r.grid_minimizer - (x - g / p.smoothness())).norm() <= 1e-6);
    CHECK(r.rhs == doctest::Approx(g.squaredNorm()).epsilon(1e-8));
    CHECK(r.lhs <= r.rhs + 1e-9);
    const ProxPlReport at_opt = verify_prox_pl(p, 0, *p.minimizer(0), 41);
    CHECK(at_opt.lhs == doctest::Approx(0.0).scale(1e-12));
    CHECK(at_opt.rhs == doctest::Approx(0.0).scale(1e-12));
  }
  SUBCASE("1-D box-constrained quadratic") {
    QuadraticOptions q;
    q.curvature = Eigen::VectorXd::Constant(1, 2.0);
    q.center = Eigen::VectorXd::Constant(1, 0.3);
    q.regularizer = Regularizer<double>::box(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
    const StaticQuadratic p(q);
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, -1.0 + 2.0 * i / 99.0);
      const ProxPlReport r = verify_prox_pl(p, 0, x, 41);
      CHECK(r.lhs <= r.rhs * (1.0 + 1e-9) + 1e-12);
    }
  }
  SUBCASE("2-D l1 quadratic") {
    QuadraticOptions q;
    q.curvature = Eigen::Vector2d(0.5, 2.0);
    q.center = Eigen::Vector2d(1.0, -0.3);
    q.regularizer = Regularizer<double>::l1(0.2);
    const StaticQuadratic p(q);
    for (int i = 0; i < 30; ++i) {
      const Eigen::VectorXd x = sample_ball(2, 3.0, 4, static_cast<std::uint64_t>(i));
      const ProxPlReport r = verify_prox_pl(p, 0, x, 41);
      CHECK(r.lhs <= r.rhs * (1.0 + 1e-6) + 1e-12);
    }
  }
}

TEST_CASE("problem construction errors") {
  LeastSquaresOptions o;
  o.mu = 2.0;
  CHECK_THROWS_AS(TimeVaryingLeastSquares{o}, std::invalid_argument);
  o = {};
  o.d = 5;
  CHECK_THROWS_AS(TimeVaryingLeastSquares{o}, std::invalid_argument);
  o = {};
  o.horizon = 3;
  const TimeVaryingLeastSquares p(o);
  CHECK_THROWS_AS(p.value(4, Eigen::VectorXd::Zero(10)), std::out_of_range);
  CHECK_THROWS_AS(p.optimal_value(-1), std::out_of_range);
  QuadraticOptions q;
  q.curvature = Eigen::Vector2d(1.0, -1.0);
  q.center = Eigen::Vector2d::Zero();
  CHECK_THROWS_AS(StaticQuadratic{q}, std::invalid_argument);
}
