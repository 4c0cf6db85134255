#pragma once

#include <Eigen/Dense>
#include <random>

#include "plgrad/rng.hpp"

namespace plgrad::detail {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double std,
                                       RandomEngine& engine) {
  std::normal_distribution<double> normal(0.0, std);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(engine);
  return m;
}

inline Eigen::VectorXd gaussian_vector(Eigen::Index n, double std, RandomEngine& engine) {
  return gaussian_matrix(n, 1, std, engine);
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q).
inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, RandomEngine& engine) {
  const Eigen::MatrixXd g = gaussian_matrix(n, n, 1.0, engine);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace plgrad::detail
