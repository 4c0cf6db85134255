#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <stdexcept>

namespace plgrad {

enum class RegularizerKind { none, l1, box };

/// Convex, proper, lower semi-continuous term g of a composite cost f + g.
/// Supported kinds: identically zero, weighted l1 norm, box indicator.
template <typename Scalar = double>
class Regularizer {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static Regularizer none() { return Regularizer(RegularizerKind::none, Scalar(0), {}, {}); }

  static Regularizer l1(Scalar weight) {
    if (!(weight >= Scalar(0))) throw std::invalid_argument("l1 weight must be nonnegative");
    return Regularizer(RegularizerKind::l1, weight, {}, {});
  }

  static Regularizer box(Vector lo, Vector hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in size");
    if ((lo.array() > hi.array()).any()) throw std::invalid_argument("box requires lo <= hi");
    return Regularizer(RegularizerKind::box, Scalar(0), std::move(lo), std::move(hi));
  }

  RegularizerKind kind() const { return kind_; }
  Scalar weight() const { return weight_; }
  const Vector& lower() const { return lo_; }
  const Vector& upper() const { return hi_; }

  /// g(x); +inf outside the box for the indicator kind.
  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    switch (kind_) {
      case RegularizerKind::none:
        return Scalar(0);
      case RegularizerKind::l1:
        return weight_ * x.template lpNorm<1>();
      case RegularizerKind::box:
        return contains(x) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
    }
    return Scalar(0);
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x, Scalar slack = Scalar(0)) const {
    if (kind_ != RegularizerKind::box) return true;
    return ((x.array() >= lo_.array() - slack) && (x.array() <= hi_.array() + slack)).all();
  }

  /// Euclidean diameter of dom g when it is bounded.
  std::optional<Scalar> diameter() const {
    if (kind_ != RegularizerKind::box) return std::nullopt;
    return (hi_ - lo_).norm();
  }

 private:
  Regularizer(RegularizerKind kind, Scalar weight, Vector lo, Vector hi)
      : kind_(kind), weight_(weight), lo_(std::move(lo)), hi_(std::move(hi)) {}

  RegularizerKind kind_;
  Scalar weight_;
  Vector lo_;
  Vector hi_;
};

/// sign(v_i) max(|v_i| - tau, 0); exact ties go to zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> soft_threshold(
    const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  return v.unaryExpr([tau](Scalar vi) {
    const Scalar shrunk = std::abs(vi) - tau;
    return shrunk > Scalar(0) ? std::copysign(shrunk, vi) : Scalar(0);
  });
}

/// argmin_y (1 / (2 step)) ||y - v||^2 + g(y)
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> prox(const Regularizer<Scalar>& reg, Scalar step,
                                              const Eigen::MatrixBase<Derived>& v) {
  if (!(step > Scalar(0))) throw std::invalid_argument("prox step must be positive");
  switch (reg.kind()) {
    case RegularizerKind::none:
      return v;
    case RegularizerKind::l1:
      return soft_threshold(v, step * reg.weight());
    case RegularizerKind::box:
      if (reg.lower().size() != v.size()) throw std::invalid_argument("box dimension mismatch");
      return v.cwiseMax(reg.lower()).cwiseMin(reg.upper());
  }
  return v;
}

/// Prox objective at y minus its value at prox(reg, step, v). Nonnegative
/// for every y when the closed form is the true minimizer.
template <typename Scalar, typename DerivedV, typename DerivedY>
Scalar prox_objective_gap(const Regularizer<Scalar>& reg, Scalar step,
                          const Eigen::MatrixBase<DerivedV>& v,
                          const Eigen::MatrixBase<DerivedY>& y) {
  if (!(step > Scalar(0))) throw std::invalid_argument("prox step must be positive");
  const auto p = prox(reg, step, v);
  const auto objective = [&](const auto& z) {
    return (z - v).squaredNorm() / (Scalar(2) * step) + reg.value(z);
  };
  return objective(y) - objective(p);
}

}  // namespace plgrad
