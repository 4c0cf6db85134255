#include "plgrad/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace plgrad {
namespace {

// sup over real k >= 1 of exp(log_norm(k)) / k^theta, where log_norm(k) is
// log ||X||_k. Evaluated on a fine grid over [1, 64], integers up to 4096,
// and the k -> infinity limit supplied by the caller.
template <typename LogNorm>
double sup_moment_ratio(LogNorm log_norm, double theta, double limit) {
  double best = limit;
  for (int j = 0; j <= 63 * 64; ++j) {
    const double k = 1.0 + j / 64.0;
    best = std::max(best, std::exp(log_norm(k) - theta * std::log(k)));
  }
  for (int k = 65; k <= 4096; ++k) {
    const double kd = k;
    best = std::max(best, std::exp(log_norm(kd) - theta * std::log(kd)));
  }
  return best;
}

// Envelope constant of chi_n (norm of a standard Gaussian vector in R^n).
double chi_envelope(Eigen::Index n) {
  const double half_n = 0.5 * static_cast<double>(n);
  const auto log_norm = [half_n](double k) {
    return (0.5 * k * std::numbers::ln2 + std::lgamma(half_n + 0.5 * k) - std::lgamma(half_n)) / k;
  };
  return sup_moment_ratio(log_norm, 0.5, 1.0 / std::sqrt(std::numbers::e));
}

// Envelope constant of |N(0, 1)|.
double half_normal_envelope() { return chi_envelope(1); }

// Envelope constant of a unit-scale Weibull variable with the given shape.
double weibull_envelope(double shape) {
  const double theta = 1.0 / shape;
  const auto log_norm = [theta](double k) { return std::lgamma(1.0 + k * theta) / k; };
  return sup_moment_ratio(log_norm, theta, std::pow(theta / std::numbers::e, theta));
}

double bias_norm(const NoiseModel& model, const Eigen::MatrixXd& map) {
  if (model.bias == 0.0) return 0.0;
  return std::abs(model.bias) * map.rowwise().sum().norm();
}

}  // namespace

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::zero:
      return "zero";
    case NoiseFamily::gaussian_iid:
      return "gaussian";
    case NoiseFamily::bounded_uniform:
      return "uniform";
    case NoiseFamily::weibull_tail:
      return "weibull";
  }
  return "zero";
}

NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "zero") return NoiseFamily::zero;
  if (name == "gaussian" || name == "gaussian_iid") return NoiseFamily::gaussian_iid;
  if (name == "uniform" || name == "bounded_uniform") return NoiseFamily::bounded_uniform;
  if (name == "weibull" || name == "weibull_tail") return NoiseFamily::weibull_tail;
  throw std::invalid_argument("unknown noise family '" + std::string(name) + "'");
}

NoiseModel NoiseModel::zero() { return {}; }

NoiseModel NoiseModel::gaussian(double sigma) {
  NoiseModel m;
  m.family = NoiseFamily::gaussian_iid;
  m.scale = sigma;
  m.validate();
  return m;
}

NoiseModel NoiseModel::uniform(double half_width) {
  NoiseModel m;
  m.family = NoiseFamily::bounded_uniform;
  m.scale = half_width;
  m.validate();
  return m;
}

NoiseModel NoiseModel::weibull(double scale, double shape) {
  NoiseModel m;
  m.family = NoiseFamily::weibull_tail;
  m.scale = scale;
  m.weibull_shape = shape;
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("noise scale must be nonnegative");
  if (!(weibull_shape > 0.0) || !std::isfinite(weibull_shape)) {
    throw std::invalid_argument("weibull shape must be positive");
  }
  if (!std::isfinite(bias)) throw std::invalid_argument("noise bias must be finite");
  for (const double f : time_factors) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw std::invalid_argument("noise time factors must be nonnegative");
  }
}

double NoiseModel::scale_at(long t) const {
  if (time_factors.empty() || t < 0) return scale;
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(t), time_factors.size() - 1);
  return scale * time_factors[idx];
}

double NoiseModel::theta() const {
  return family == NoiseFamily::weibull_tail ? 1.0 / weibull_shape : 0.5;
}

double NoiseModel::coordinate_variance(long t) const {
  const double s = scale_at(t);
  switch (family) {
    case NoiseFamily::zero:
      return 0.0;
    case NoiseFamily::gaussian_iid:
      return s * s;
    case NoiseFamily::bounded_uniform:
      return s * s / 3.0;
    case NoiseFamily::weibull_tail:
      return s * s * std::tgamma(1.0 + 2.0 / weibull_shape);
  }
  return 0.0;
}

Eigen::VectorXd sample(const NoiseModel& model, Eigen::Index n, const StreamKey& key) {
  const long t = static_cast<long>(key.time);
  if (model.family == NoiseFamily::zero || model.scale_at(t) == 0.0) {
    return Eigen::VectorXd::Constant(n, model.bias);
  }
  auto engine = make_engine(key, StreamPurpose::gradient_noise);
  return sample_with(model, n, t, engine);
}

Eigen::VectorXd sample_with(const NoiseModel& model, Eigen::Index n, long t, RandomEngine& engine) {
  Eigen::VectorXd e = Eigen::VectorXd::Constant(n, model.bias);
  const double s = model.scale_at(t);
  if (model.family == NoiseFamily::zero || s == 0.0) return e;
  switch (model.family) {
    case NoiseFamily::gaussian_iid: {
      std::normal_distribution<double> dist(0.0, s);
      for (Eigen::Index i = 0; i < n; ++i) e[i] += dist(engine);
      break;
    }
    case NoiseFamily::bounded_uniform: {
      std::uniform_real_distribution<double> dist(-s, s);
      for (Eigen::Index i = 0; i < n; ++i) e[i] += dist(engine);
      break;
    }
    case NoiseFamily::weibull_tail: {
      std::weibull_distribution<double> dist(model.weibull_shape, s);
      std::bernoulli_distribution sign(0.5);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = dist(engine);
        e[i] += sign(engine) ? w : -w;
      }
      break;
    }
    case NoiseFamily::zero:
      break;
  }
  return e;
}

SubWeibullParams coordinate_envelope(const NoiseModel& model, long t) {
  const double s = model.scale_at(t);
  const double theta = model.theta();
  double k = 0.0;
  switch (model.family) {
    case NoiseFamily::zero:
      break;
    case NoiseFamily::gaussian_iid:
      k = s * half_normal_envelope();
      break;
    case NoiseFamily::bounded_uniform:
      // |u| <= s, and ||u||_k <= s <= s k^theta.
      k = s;
      break;
    case NoiseFamily::weibull_tail:
      k = s * weibull_envelope(model.weibull_shape);
      break;
  }
  return add_scalar(SubWeibullParams(theta, k), model.bias);
}

SubWeibullParams envelope_norm(const NoiseModel& model, Eigen::Index n, long t) {
  if (n < 1) throw std::invalid_argument("envelope_norm: dimension must be >= 1");
  const double s = model.scale_at(t);
  const double rn = std::sqrt(static_cast<double>(n));
  SubWeibullParams base(model.theta(), 0.0);
  switch (model.family) {
    case NoiseFamily::zero:
      break;
    case NoiseFamily::gaussian_iid:
      base = SubWeibullParams(0.5, s * chi_envelope(n));
      break;
    case NoiseFamily::bounded_uniform:
      // ||e||_k <= ||e||_2 = s sqrt(n/3) for k <= 2 and ||e|| <= s sqrt(n)
      // always; both stay below s sqrt(n/2) sqrt(k).
      base = SubWeibullParams(0.5, s * std::sqrt(0.5 * static_cast<double>(n)));
      break;
    case NoiseFamily::weibull_tail: {
      NoiseModel unbiased = model;
      unbiased.bias = 0.0;
      base = envelope_norm_generic(unbiased, n, t);
      break;
    }
  }
  // ||e0 + b 1|| <= ||e0|| + |b| sqrt(n)
  return add_scalar(base, std::abs(model.bias) * rn);
}

SubWeibullParams envelope_norm_generic(const NoiseModel& model, Eigen::Index n, long t) {
  if (n < 1) throw std::invalid_argument("envelope_norm_generic: dimension must be >= 1");
  const SubWeibullParams squared = power(coordinate_envelope(model, t), 2.0);
  SubWeibullParams total = squared;
  for (Eigen::Index i = 1; i < n; ++i) total = sum(total, squared);
  return power(total, 0.5);
}

SubWeibullParams envelope_mapped(const NoiseModel& model, const Eigen::MatrixXd& map, long t) {
  NoiseModel unbiased = model;
  unbiased.bias = 0.0;
  const double gain = map.size() == 0 ? 0.0 : map.jacobiSvd().singularValues()(0);
  const SubWeibullParams base = scale(envelope_norm(unbiased, map.cols(), t), gain);
  return add_scalar(base, bias_norm(model, map));
}

double second_moment(const NoiseModel& model, Eigen::Index n, long t) {
  if (n < 1) throw std::invalid_argument("second_moment: dimension must be >= 1");
  const double nd = static_cast<double>(n);
  return nd * (model.coordinate_variance(t) + model.bias * model.bias);
}

double second_moment_mapped(const NoiseModel& model, const Eigen::MatrixXd& map, long t) {
  const double b = bias_norm(model, map);
  return model.coordinate_variance(t) * map.squaredNorm() + b * b;
}

Moment first_moment_mapped(const NoiseModel& model, const Eigen::MatrixXd& map, long t) {
  if (model.family == NoiseFamily::zero && model.bias == 0.0) return {0.0, true};
  const bool identity = map.rows() == map.cols() && map.isIdentity(0.0);
  if (model.family == NoiseFamily::gaussian_iid && model.bias == 0.0 && identity) {
    const double half_n = 0.5 * static_cast<double>(map.cols());
    const double chi_mean =
        std::sqrt(2.0) * std::exp(std::lgamma(half_n + 0.5) - std::lgamma(half_n));
    return {model.scale_at(t) * chi_mean, true};
  }
  return {std::sqrt(second_moment_mapped(model, map, t)), false};
}

}  // namespace plgrad
