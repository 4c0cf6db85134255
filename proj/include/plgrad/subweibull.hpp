#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace plgrad {

/// Tail class (theta, K) of a real random variable X, with K the moment
/// constant: ||X||_k = E[|X|^k]^(1/k) <= K k^theta for every k >= 1.
///
/// K = 0 denotes a variable that is zero almost surely. Every operation
/// below accepts it, so noiseless runs go through the same code.
template <typename Scalar = double>
class SubWeibull {
 public:
  SubWeibull(Scalar theta, Scalar k) : theta_(theta), k_(k) {
    if (!(theta > Scalar(0)) || !std::isfinite(static_cast<double>(theta))) {
      throw std::invalid_argument("sub-Weibull theta must be positive, got " +
                                  std::to_string(static_cast<double>(theta)));
    }
    if (!(k >= Scalar(0)) || !std::isfinite(static_cast<double>(k))) {
      throw std::invalid_argument("sub-Weibull K must be nonnegative, got " +
                                  std::to_string(static_cast<double>(k)));
    }
  }

  Scalar theta() const { return theta_; }
  Scalar k() const { return k_; }
  bool degenerate() const { return k_ == Scalar(0); }

  friend bool operator==(const SubWeibull&, const SubWeibull&) = default;

 private:
  Scalar theta_;
  Scalar k_;
};

using SubWeibullParams = SubWeibull<double>;

/// a X
template <typename Scalar>
SubWeibull<Scalar> scale(const SubWeibull<Scalar>& x, Scalar a) {
  return {x.theta(), std::abs(a) * x.k()};
}

/// a + X
template <typename Scalar>
SubWeibull<Scalar> add_scalar(const SubWeibull<Scalar>& x, Scalar a) {
  return {x.theta(), std::abs(a) + x.k()};
}

/// X1 + X2, valid without any independence assumption.
template <typename Scalar>
SubWeibull<Scalar> sum(const SubWeibull<Scalar>& x1, const SubWeibull<Scalar>& x2) {
  return {std::max(x1.theta(), x2.theta()), x1.k() + x2.k()};
}

/// |X|^a for a > 0.
template <typename Scalar>
SubWeibull<Scalar> power(const SubWeibull<Scalar>& x, Scalar a) {
  if (!(a > Scalar(0))) {
    throw std::invalid_argument("power exponent must be positive");
  }
  using std::pow;
  const Scalar theta = a * x.theta();
  const Scalar factor = std::max(Scalar(1), pow(a, a * x.theta()));
  return {theta, pow(x.k(), a) * factor};
}

/// Relaxes x into the coarser class (theta', K'); both must not shrink.
template <typename Scalar>
SubWeibull<Scalar> include(const SubWeibull<Scalar>& x, Scalar theta_prime, Scalar k_prime) {
  if (theta_prime < x.theta() || k_prime < x.k()) {
    throw std::invalid_argument("inclusion requires theta' >= theta and K' >= K");
  }
  return {theta_prime, k_prime};
}

/// Constant of the tail form P(|X| >= eps) <= 2 exp(-(eps / K1)^(1/theta)).
template <typename Scalar>
Scalar tail_constant(const SubWeibull<Scalar>& x) {
  using std::pow;
  const Scalar e = std::numbers::e_v<Scalar>;
  return pow(Scalar(2) * e / x.theta(), x.theta()) * x.k();
}

/// Level b with P(|X| > b) <= delta.
template <typename Scalar>
Scalar hp_bound(const SubWeibull<Scalar>& x, Scalar delta) {
  if (!(delta > Scalar(0) && delta < Scalar(1))) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (x.degenerate()) return Scalar(0);
  using std::log;
  using std::pow;
  return pow(log(Scalar(2) / delta), x.theta()) * tail_constant(x);
}

/// Empirical moment constant: max over k = 1..k_max of ||X||_k / k^theta,
/// with ||X||_k estimated from the samples.
template <typename Scalar>
SubWeibull<Scalar> fit_from_samples(std::span<const Scalar> samples, Scalar theta,
                                    int k_max = 10) {
  if (samples.empty()) throw std::invalid_argument("fit_from_samples: no samples");
  if (k_max < 1) throw std::invalid_argument("fit_from_samples: k_max must be >= 1");
  if (!(theta > Scalar(0))) throw std::invalid_argument("fit_from_samples: theta must be positive");

  using std::abs;
  using std::pow;
  // Moments are computed relative to the largest magnitude so that high
  // orders do not overflow.
  Scalar peak = 0;
  for (const Scalar s : samples) peak = std::max(peak, abs(s));
  if (peak == Scalar(0)) return {theta, Scalar(0)};

  Scalar best = 0;
  const auto count = static_cast<Scalar>(samples.size());
  for (int k = 1; k <= k_max; ++k) {
    Scalar acc = 0;
    for (const Scalar s : samples) acc += pow(abs(s) / peak, k);
    const Scalar norm_k = peak * pow(acc / count, Scalar(1) / k);
    best = std::max(best, norm_k / pow(Scalar(k), theta));
  }
  return {theta, best};
}

}  // namespace plgrad
