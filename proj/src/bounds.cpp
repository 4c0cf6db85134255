#include "plgrad/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "plgrad/subweibull.hpp"

namespace plgrad {
namespace {

void check_zeta(double zeta) {
  // zeta = 0 (mu = L) is admitted: the recursions stay valid.
  if (!(zeta >= 0.0 && zeta < 1.0)) throw std::invalid_argument("zeta must lie in [0, 1)");
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

void check_inputs(double r0, std::span<const double> error, std::span<const double> psi) {
  if (!(r0 >= 0.0)) throw std::invalid_argument("r0 must be nonnegative");
  if (error.size() != psi.size()) throw std::invalid_argument("error and psi series differ in length");
  for (std::size_t i = 0; i < error.size(); ++i) {
    if (!(error[i] >= 0.0) || !(psi[i] >= 0.0)) throw std::invalid_argument("bound inputs must be nonnegative");
  }
}

BoundInputs snapshot(double r0, double zeta, std::span<const double> error, std::span<const double> psi) {
  return {r0, zeta, {error.begin(), error.end()}, {psi.begin(), psi.end()}};
}

}  // namespace

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::ogd_expectation:
      return "ogd_expectation";
    case BoundKind::ogd_expectation_tight:
      return "ogd_expectation_tight";
    case BoundKind::ogd_highprob:
      return "ogd_highprob";
    case BoundKind::opgm_expectation:
      return "opgm_expectation";
    case BoundKind::opgm_highprob:
      return "opgm_highprob";
    case BoundKind::asymptote:
      return "asymptote";
  }
  return "unknown";
}

double contraction_factor(double mu, double smoothness) {
  if (!(mu > 0.0) || !(smoothness > 0.0) || mu > smoothness) {
    throw std::invalid_argument("contraction factor needs 0 < mu <= L");
  }
  return 1.0 - mu / smoothness;
}

double ogd_highprob_factor(double theta, double delta) {
  return hp_bound(SubWeibullParams(2.0 * theta, 1.0), delta);
}

double opgm_highprob_factor(double theta, double delta) {
  return hp_bound(SubWeibullParams(theta, 1.0), delta);
}

BoundSeries ogd_expectation_bound(double r0, double zeta, double smoothness,
                                  std::span<const double> second_moments, std::span<const double> psi,
                                  bool trajectory_psi) {
  check_zeta(zeta);
  check_inputs(r0, second_moments, psi);
  if (!(smoothness > 0.0)) throw std::invalid_argument("smoothness must be positive");
  BoundSeries out;
  out.kind = trajectory_psi ? BoundKind::ogd_expectation_tight : BoundKind::ogd_expectation;
  out.values.reserve(psi.size() + 1);
  double b = r0;
  out.values.push_back(b);
  for (std::size_t t = 0; t < psi.size(); ++t) {
    b = zeta * b + second_moments[t] / (2.0 * smoothness) + psi[t];
    out.values.push_back(b);
  }
  out.inputs = snapshot(r0, zeta, second_moments, psi);
  return out;
}

BoundSeries ogd_highprob_bound(double r0, double zeta, double smoothness, std::span<const double> envelope_ks,
                               std::span<const double> psi, double theta, double delta) {
  check_zeta(zeta);
  check_delta(delta);
  check_inputs(r0, envelope_ks, psi);
  if (!(smoothness > 0.0)) throw std::invalid_argument("smoothness must be positive");

  const double level = ogd_highprob_factor(theta, delta);
  BoundSeries out;
  out.kind = BoundKind::ogd_highprob;
  out.delta = delta;
  // The constant r0 is subW(2 theta, r0); each step scales the aggregate by
  // zeta, adds ||e_t||^2 / (2L) ~ subW(2 theta, 4^theta K_t^2 / (2L)) and
  // shifts by psi_{t+1}.
  SubWeibullParams aggregate(2.0 * theta, r0);
  out.values.push_back(level * aggregate.k());
  for (std::size_t t = 0; t < psi.size(); ++t) {
    const SubWeibullParams error_sq = power(SubWeibullParams(theta, envelope_ks[t]), 2.0);
    aggregate = add_scalar(sum(scale(aggregate, zeta), scale(error_sq, 1.0 / (2.0 * smoothness))), psi[t]);
    out.values.push_back(level * aggregate.k());
  }
  out.inputs = snapshot(r0, zeta, envelope_ks, psi);
  return out;
}

BoundSeries opgm_expectation_bound(double r0, double zeta, std::span<const double> first_moments,
                                   std::span<const double> psi, double diameter) {
  check_zeta(zeta);
  check_inputs(r0, first_moments, psi);
  if (!(diameter > 0.0)) throw std::invalid_argument("diameter must be positive");
  BoundSeries out;
  out.kind = BoundKind::opgm_expectation;
  double b = r0;
  out.values.push_back(b);
  for (std::size_t t = 0; t < psi.size(); ++t) {
    b = zeta * b + 2.0 * diameter * first_moments[t] + psi[t];
    out.values.push_back(b);
  }
  out.inputs = snapshot(r0, zeta, first_moments, psi);
  return out;
}

BoundSeries opgm_highprob_bound(double r0, double zeta, std::span<const double> envelope_ks,
                                std::span<const double> psi, double diameter, double theta, double delta) {
  check_zeta(zeta);
  check_delta(delta);
  check_inputs(r0, envelope_ks, psi);
  if (!(diameter > 0.0)) throw std::invalid_argument("diameter must be positive");

  const double level = opgm_highprob_factor(theta, delta);
  BoundSeries out;
  out.kind = BoundKind::opgm_highprob;
  out.delta = delta;
  SubWeibullParams aggregate(theta, r0);
  out.values.push_back(level * aggregate.k());
  for (std::size_t t = 0; t < psi.size(); ++t) {
    const SubWeibullParams error(theta, envelope_ks[t]);
    aggregate = add_scalar(sum(scale(aggregate, zeta), scale(error, 2.0 * diameter)), psi[t]);
    out.values.push_back(level * aggregate.k());
  }
  out.inputs = snapshot(r0, zeta, envelope_ks, psi);
  return out;
}

double asymptote(double mu, double smoothness, double e_bar_second_moment, double psi_bar) {
  if (!(mu > 0.0) || !(smoothness > 0.0)) throw std::invalid_argument("mu and L must be positive");
  if (!(e_bar_second_moment >= 0.0) || !(psi_bar >= 0.0)) {
    throw std::invalid_argument("asymptote inputs must be nonnegative");
  }
  return e_bar_second_moment / (2.0 * mu) + (smoothness / mu) * psi_bar;
}

BoundSeries asymptote_series(double value, long horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  BoundSeries out;
  out.kind = BoundKind::asymptote;
  out.values.assign(static_cast<std::size_t>(horizon) + 1, value);
  return out;
}

BoundSeries markov_highprob_bound(const BoundSeries& expectation_bound, double delta) {
  check_delta(delta);
  if (expectation_bound.delta) throw std::invalid_argument("Markov bound needs an expectation bound");
  BoundSeries out = expectation_bound;
  out.delta = delta;
  for (double& v : out.values) v /= delta;
  return out;
}

}  // namespace plgrad
