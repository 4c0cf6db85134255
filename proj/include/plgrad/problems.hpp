#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plgrad/prox.hpp"

namespace plgrad {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Constants shared by every time step of an online problem.
struct ProblemConstants {
  double smoothness = 1.0;     // L: gradient Lipschitz constant of every f_t
  double pl_constant = 1.0;    // mu: (proximal-)PL constant of every F_t
  double domain_radius = 1.0;  // r: the domain is the open ball ||x|| < r
  double diameter = 2.0;       // D: 2 r, or the box diameter for box indicators
};

/// Time-indexed composite cost F_t = f_t + g_t for t = 0, ..., horizon().
///
/// Instances are immutable after construction; every random quantity is
/// drawn in the constructor from the build seed, so all const member
/// functions may be called concurrently.
class OnlineProblem {
 public:
  virtual ~OnlineProblem() = default;

  virtual std::string_view name() const = 0;
  virtual Eigen::Index dimension() const = 0;

  long horizon() const { return horizon_; }
  const ProblemConstants& constants() const { return constants_; }
  double smoothness() const { return constants_.smoothness; }
  double pl_constant() const { return constants_.pl_constant; }
  double domain_radius() const { return constants_.domain_radius; }
  double diameter() const { return constants_.diameter; }

  /// f_t(x), the smooth part.
  virtual double value(long t, const VectorXd& x) const = 0;
  virtual VectorXd gradient(long t, const VectorXd& x) const = 0;

  /// g_t, or nullptr when the problem has no prox handle (g_t = 0 and
  /// only plain gradient steps apply).
  const Regularizer<double>* regularizer(long t) const;

  /// F_t(x) = f_t(x) + g_t(x).
  double composite_value(long t, const VectorXd& x) const;

  /// F_t^*.
  double optimal_value(long t) const;
  /// False when F_t^* comes from an iterative inner solve.
  bool optimal_value_exact() const { return optimal_exact_; }
  /// A global minimizer of F_t when one is known.
  virtual std::optional<VectorXd> minimizer(long /*t*/) const { return std::nullopt; }

  /// Gradient errors enter as e_t = M nu_t with nu_t drawn by the noise
  /// model in noise_dimension() coordinates. M is the identity unless the
  /// problem estimates its gradient from noisy output measurements.
  Eigen::Index noise_dimension() const;
  MatrixXd noise_map() const;

  /// Gradient estimate v_t given the raw noise draw nu_t. The default is
  /// grad f_t(x) + M nu; measurement-based problems override it with their
  /// output-feedback formula, which yields the same vector.
  virtual VectorXd measured_gradient(long t, const VectorXd& x, const VectorXd& nu) const;

 protected:
  OnlineProblem(long horizon, ProblemConstants constants);

  void set_optimal_values(std::vector<double> values, bool exact);
  void set_regularizer(Regularizer<double> reg) { regularizer_ = std::move(reg); }
  void set_noise_map(MatrixXd map) { noise_map_ = std::move(map); }
  void set_constants(ProblemConstants constants);
  void check_time(long t) const;

 private:
  long horizon_;
  ProblemConstants constants_;
  std::vector<double> optimal_values_;
  bool optimal_exact_ = true;
  std::optional<Regularizer<double>> regularizer_;
  std::optional<MatrixXd> noise_map_;
};

// ---------------------------------------------------------------------------
// Presets

enum class SpectrumSpacing {
  eigenvalues,      // eigenvalues of A^T A equally spaced on [mu, L]
  singular_values,  // singular values of A equally spaced on [mu, L]
};

struct LeastSquaresOptions {
  int n = 10;
  int d = 20;
  double mu = 0.1;
  double smoothness = 1.0;
  double drift_std = 0.0;
  double obs_noise_std = 0.0;
  std::uint64_t seed = 1;
  long horizon = 500;
  SpectrumSpacing spacing = SpectrumSpacing::eigenvalues;
  double radius = 0.0;        // 0 selects 10 ||x_0^*||
  bool prox_handle = false;   // attach g = 0 explicitly so proximal steps apply
};

/// f_t(x) = 1/2 ||A x - b_t||^2 with b_t = A x_t^* + noise and x_t^* a
/// Gaussian random walk started at the all-ones vector.
class TimeVaryingLeastSquares final : public OnlineProblem {
 public:
  explicit TimeVaryingLeastSquares(const LeastSquaresOptions& options);

  std::string_view name() const override { return "least_squares"; }
  Eigen::Index dimension() const override { return a_.cols(); }
  double value(long t, const VectorXd& x) const override;
  VectorXd gradient(long t, const VectorXd& x) const override;
  std::optional<VectorXd> minimizer(long t) const override;

  const MatrixXd& matrix() const { return a_; }
  const VectorXd& target(long t) const;
  const VectorXd& drifting_parameter(long t) const;

 private:
  MatrixXd a_;
  MatrixXd u_range_;   // d x n orthonormal basis of range(A)
  VectorXd singular_;  // singular values of A
  MatrixXd v_;         // right singular vectors
  std::vector<VectorXd> b_;
  std::vector<VectorXd> walk_;
};

struct LogisticOptions {
  int n = 5;
  int d = 50;
  std::uint64_t seed = 1;
  long horizon = 100;
  double drift_std = 0.0;
  double radius = 2.0;
};

/// f_t(x) = sum_i log(1 + exp(b_i a_{i,t}^T x)) with labels b_i in {-1, 1}
/// and features drifting by a Gaussian random walk. F_t^* comes from a
/// Newton inner solve and is flagged as not exact. The declared mu is the
/// strong-convexity modulus of f_t over the domain ball, a valid but
/// conservative PL constant; verify_pl reports the sampled certificate.
class OnlineLogistic final : public OnlineProblem {
 public:
  explicit OnlineLogistic(const LogisticOptions& options);

  std::string_view name() const override { return "logistic"; }
  Eigen::Index dimension() const override { return features_.front().cols(); }
  double value(long t, const VectorXd& x) const override;
  VectorXd gradient(long t, const VectorXd& x) const override;
  std::optional<VectorXd> minimizer(long t) const override;

  MatrixXd hessian(long t, const VectorXd& x) const;

 private:
  std::vector<MatrixXd> features_;
  VectorXd labels_;
  std::vector<VectorXd> minimizers_;
};

struct LtiOptions {
  int n = 4;
  int m = 6;
  std::uint64_t seed = 1;
  long horizon = 200;
  double disturbance_std = 0.1;
  double reference_amplitude = 1.0;
  double radius = 0.0;  // 0 selects 10 max(||x_0^*||, 1)
};

/// f_t(x) = 1/2 ||G x + H w_t - ybar_t||^2 for the steady-state map of a
/// stable LTI system. The gradient estimate is G^T (yhat_t - ybar_t) with
/// yhat_t a noisy output measurement, so e_t = G^T nu_t.
class LtiTracking final : public OnlineProblem {
 public:
  explicit LtiTracking(const LtiOptions& options);

  std::string_view name() const override { return "lti_tracking"; }
  Eigen::Index dimension() const override { return g_.cols(); }
  double value(long t, const VectorXd& x) const override;
  VectorXd gradient(long t, const VectorXd& x) const override;
  std::optional<VectorXd> minimizer(long t) const override;
  VectorXd measured_gradient(long t, const VectorXd& x, const VectorXd& nu) const override;

  const MatrixXd& output_map() const { return g_; }
  VectorXd output(long t, const VectorXd& x) const;

 private:
  MatrixXd g_;
  MatrixXd h_;
  std::vector<VectorXd> w_;
  std::vector<VectorXd> reference_;
  std::vector<VectorXd> minimizers_;
};

/// Uncontrollable powers w_t (one column per signal) and the reference
/// p_ref_t, one row per time step.
struct DemandResponseTraces {
  MatrixXd w;     // (horizon + 1) x m
  VectorXd p_ref; // horizon + 1
};

/// Synthetic traces sized for n_der devices: a daily-shaped load, a solar
/// injection and a reference, each a few sinusoids plus seeded jitter.
DemandResponseTraces synthetic_demand_response_traces(int n_der, long horizon, std::uint64_t seed);

/// Half energy storage in [-50, 50] kW, half solar in [0, 50] kW.
std::pair<VectorXd, VectorXd> default_der_bounds(int n_der);

struct DemandResponseOptions {
  VectorXd lo;
  VectorXd hi;
  DemandResponseTraces traces;
  long horizon = 500;
  VectorXd a_x;  // empty selects all ones
  VectorXd a_w;  // empty selects all ones
};

/// F_t(x) = 1/2 (a_x^T x + a_w^T w_t - p_ref_t)^2 + indicator{lo <= x <= hi}.
///
/// The gradient estimate uses a measured net power phat = p + nu, so
/// e_t = a_x nu_t. mu = min(min_i a_i^2, ||a_x||^2 / 2) is a proximal-PL
/// constant of this cost over the box for every t.
class DemandResponse final : public OnlineProblem {
 public:
  explicit DemandResponse(DemandResponseOptions options);

  std::string_view name() const override { return "demand_response"; }
  Eigen::Index dimension() const override { return a_x_.size(); }
  double value(long t, const VectorXd& x) const override;
  VectorXd gradient(long t, const VectorXd& x) const override;
  VectorXd measured_gradient(long t, const VectorXd& x, const VectorXd& nu) const override;

  /// Net power p_t = a_x^T x + a_w^T w_t at the point of common coupling.
  double net_power(long t, const VectorXd& x) const;
  /// p_ref_t - a_w^T w_t, the value a_x^T x should reach.
  double target(long t) const;
  /// Range of a_x^T x over the box.
  std::pair<double, double> reachable_range() const;

 private:
  VectorXd a_x_;
  VectorXd uncontrolled_;  // a_w^T w_t per t
  VectorXd p_ref_;
};

struct QuadraticOptions {
  VectorXd curvature;  // diagonal Hessian entries h_i > 0
  VectorXd center;
  double mu = 0.0;          // 0 selects min h_i
  double smoothness = 0.0;  // 0 selects max h_i
  std::optional<Regularizer<double>> regularizer;
  long horizon = 100;
  double radius = 0.0;      // 0 selects 10 max(||center||, 1)
};

/// Static separable quadratic f(x) = 1/2 sum_i h_i (x_i - c_i)^2 with an
/// optional separable regularizer; F^* is exact.
class StaticQuadratic final : public OnlineProblem {
 public:
  explicit StaticQuadratic(QuadraticOptions options);

  std::string_view name() const override { return "quadratic"; }
  Eigen::Index dimension() const override { return curvature_.size(); }
  double value(long t, const VectorXd& x) const override;
  VectorXd gradient(long t, const VectorXd& x) const override;
  std::optional<VectorXd> minimizer(long t) const override;

 private:
  VectorXd curvature_;
  VectorXd center_;
  VectorXd minimizer_;
};

// ---------------------------------------------------------------------------
// Variability and certificates

struct VariabilityRecord {
  double sigma = 0.0;       // |F_t^* - F_{t-1}^*|
  double phi_tilde = 0.0;   // |F_t(x_t) - F_{t-1}(x_t)|
  double psi_tilde = 0.0;   // sigma + phi_tilde
  double psi_bar = 0.0;     // running supremum of psi_tilde, or a supplied bound
};

/// Drift of the problem between t - 1 and t, measured at x_t. psi_bar is
/// max(psi_bar_so_far, psi_tilde).
VariabilityRecord variability(const OnlineProblem& problem, long t, const VectorXd& x,
                              double psi_bar_so_far = 0.0);

struct PlReport {
  double max_violation = 0.0;  // max of 2 mu (f - f^*) - ||grad f||^2
  double mu_hat = 0.0;         // min of ||grad f||^2 / (2 (f - f^*)) over used samples
  int samples_used = 0;
  int samples_skipped = 0;     // f - f^* too close to zero for a ratio
};

/// Samples x uniformly in the domain ball and checks the PL inequality.
PlReport verify_pl(const OnlineProblem& problem, long t, int n_samples, std::uint64_t seed);

struct ProxPlReport {
  double lhs = 0.0;  // 2 mu (F(x) - F^*)
  double rhs = 0.0;  // A_g(x, 1/L), from grid minimization
  VectorXd grid_minimizer;
};

/// Evaluates both sides of the proximal-PL inequality at x with
/// xi = 1 / L, minimizing over y on a refined grid. Limited to n <= 3.
ProxPlReport verify_prox_pl(const OnlineProblem& problem, long t, const VectorXd& x,
                            int grid_resolution);

/// max_i |g_i - fd_i| / max(||g||_inf, ||fd||_inf, floor) between the
/// analytic gradient and central finite differences of f_t.
double gradient_fd_error(const OnlineProblem& problem, long t, const VectorXd& x,
                         double step = 1e-5, double floor = 1e-8);

/// Uniform sample from the open ball of the given radius in R^n.
VectorXd sample_ball(Eigen::Index n, double radius, std::uint64_t seed, std::uint64_t index);

}  // namespace plgrad
