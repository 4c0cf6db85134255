#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace plgrad {

enum class BoundKind {
  ogd_expectation,
  ogd_expectation_tight,  // trajectory variability in place of its supremum
  ogd_highprob,
  opgm_expectation,
  opgm_highprob,
  asymptote,
};

std::string_view to_string(BoundKind kind);

/// Inputs a bound series was computed from. Per-step sequences have one
/// entry per transition t -> t + 1: error[t] describes e_t and psi[t] is
/// the variability term psi_{t+1}.
struct BoundInputs {
  double r0 = 0.0;
  double zeta = 0.0;
  std::vector<double> error;
  std::vector<double> psi;
};

/// Regret certificate B_t for t = 0, ..., T.
struct BoundSeries {
  BoundKind kind = BoundKind::ogd_expectation;
  std::vector<double> values;
  std::optional<double> delta;  // high-probability kinds only
  BoundInputs inputs;
};

/// zeta = 1 - mu / L.
double contraction_factor(double mu, double smoothness);

/// log^(2 theta)(2 / delta) (e / theta)^(2 theta): high-probability level
/// of a subW(2 theta, 1) variable.
double ogd_highprob_factor(double theta, double delta);

/// log^theta(2 / delta) (2 e / theta)^theta: high-probability level of
/// a subW(theta, 1) variable.
double opgm_highprob_factor(double theta, double delta);

/// B_0 = r0, B_{t+1} = zeta B_t + second_moments[t] / (2 L) + psi[t].
/// With psi taken from trajectory variability this is the tighter variant;
/// select it with trajectory_psi so the kind records it.
BoundSeries ogd_expectation_bound(double r0, double zeta, double smoothness,
                                  std::span<const double> second_moments, std::span<const double> psi,
                                  bool trajectory_psi = false);

/// h(theta, delta) K'_t, where K'_t is the moment constant of
/// kappa_t + (1 / 2L) sum zeta^(t-i) ||e_(i-1)||^2 assembled with the
/// closure rules from ||e_t|| ~ subW(theta, envelope_ks[t]).
BoundSeries ogd_highprob_bound(double r0, double zeta, double smoothness, std::span<const double> envelope_ks,
                               std::span<const double> psi, double theta, double delta);

/// B_0 = r0, B_{t+1} = zeta B_t + 2 D first_moments[t] + psi[t].
BoundSeries opgm_expectation_bound(double r0, double zeta, std::span<const double> first_moments,
                                   std::span<const double> psi, double diameter);

/// h_p(theta, delta) K''_t with K''_t = kappa_t + 2 D sum zeta^(t-i) K_(i-1).
BoundSeries opgm_highprob_bound(double r0, double zeta, std::span<const double> envelope_ks,
                                std::span<const double> psi, double diameter, double theta, double delta);

/// limsup r_t <= e_bar / (2 mu) + (L / mu) psi_bar.
double asymptote(double mu, double smoothness, double e_bar_second_moment, double psi_bar);

/// Constant series at the asymptote value, for tabulation next to the others.
BoundSeries asymptote_series(double value, long horizon);

/// Expectation bound divided by delta (Markov's inequality).
BoundSeries markov_highprob_bound(const BoundSeries& expectation_bound, double delta);

}  // namespace plgrad
