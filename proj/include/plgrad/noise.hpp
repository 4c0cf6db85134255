#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "plgrad/rng.hpp"
#include "plgrad/subweibull.hpp"

namespace plgrad {

enum class NoiseFamily { zero, gaussian_iid, bounded_uniform, weibull_tail };

std::string_view to_string(NoiseFamily family);
NoiseFamily parse_noise_family(std::string_view name);

/// Distribution of the gradient error e_t. Coordinates are i.i.d.:
///   gaussian_iid     N(0, scale^2)
///   bounded_uniform  U[-scale, scale]
///   weibull_tail     random sign times Weibull(shape, scale); the tail
///                    exponent of the class is 1 / shape
/// plus an optional constant bias added to every coordinate. The optional
/// time_factors series multiplies scale at each t (t beyond the series
/// reuses the last entry).
struct NoiseModel {
  NoiseFamily family = NoiseFamily::zero;
  double scale = 0.0;
  double weibull_shape = 1.0;
  double bias = 0.0;
  std::vector<double> time_factors;

  static NoiseModel zero();
  static NoiseModel gaussian(double sigma);
  static NoiseModel uniform(double half_width);
  static NoiseModel weibull(double scale, double shape);

  void validate() const;

  double scale_at(long t) const;
  /// Tail exponent of the class the coordinates (and the norm) belong to.
  double theta() const;
  /// Variance of one coordinate at time t, bias excluded.
  double coordinate_variance(long t) const;
};

/// Draws e_t in R^n. Bit-identical for identical (model, n, key).
Eigen::VectorXd sample(const NoiseModel& model, Eigen::Index n, const StreamKey& key);

/// Draws e_t from an engine the caller owns (bulk sampling for fits and
/// Monte Carlo checks).
Eigen::VectorXd sample_with(const NoiseModel& model, Eigen::Index n, long t, RandomEngine& engine);

/// Envelope of |e_{t,i}| for one coordinate.
SubWeibullParams coordinate_envelope(const NoiseModel& model, long t = 0);

/// Envelope of ||e_t|| from the family's exact norm moments where they are
/// available (Gaussian via the chi distribution, uniform via boundedness),
/// otherwise from the generic composition.
SubWeibullParams envelope_norm(const NoiseModel& model, Eigen::Index n, long t = 0);

/// Envelope of ||e_t|| obtained by squaring the coordinate envelopes,
/// summing them, and taking the square root with the closure rules.
/// Looser than envelope_norm; kept for cross-checking.
SubWeibullParams envelope_norm_generic(const NoiseModel& model, Eigen::Index n, long t = 0);

/// Envelope of ||M e_t|| where e_t has m = M.cols() coordinates.
SubWeibullParams envelope_mapped(const NoiseModel& model, const Eigen::MatrixXd& map, long t = 0);

/// E||e_t||^2, exact for every supported family.
double second_moment(const NoiseModel& model, Eigen::Index n, long t = 0);
/// E||M e_t||^2, exact.
double second_moment_mapped(const NoiseModel& model, const Eigen::MatrixXd& map, long t = 0);

struct Moment {
  double value = 0.0;
  bool exact = true;
};

/// E||M e_t||. Exact for unbiased Gaussian noise through an identity map;
/// otherwise the upper bound sqrt(E||M e_t||^2), flagged as not exact.
Moment first_moment_mapped(const NoiseModel& model, const Eigen::MatrixXd& map, long t = 0);

}  // namespace plgrad
