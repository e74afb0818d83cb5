#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fairgp/common.hpp"
#include "fairgp/kernel.hpp"

namespace oracle {

using fairgp::Index;
using fairgp::Matrix;
using fairgp::Vector;

inline Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

inline double rbf(const Vector& x, const Vector& z, double l, double v) {
  double d2 = 0.0;
  for (Index k = 0; k < x.size(); ++k) d2 += (x(k) - z(k)) * (x(k) - z(k));
  return v * std::exp(-d2 / (2.0 * l * l));
}

inline Matrix rbf_cross(const Matrix& Z, const Matrix& X, double l, double v = 1.0) {
  Matrix K(Z.rows(), X.rows());
  for (Index i = 0; i < Z.rows(); ++i)
    for (Index j = 0; j < X.rows(); ++j) K(i, j) = rbf(Z.row(i), X.row(j), l, v);
  return K;
}

inline Matrix centering(Index n) {
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

/// sin of the largest principal angle between the Euclidean column spans.
inline double span_distance(const Matrix& A, const Matrix& B) {
  const Matrix Qa = Eigen::HouseholderQR<Matrix>(A).householderQ() * Matrix::Identity(A.rows(), A.cols());
  const Matrix Qb = Eigen::HouseholderQR<Matrix>(B).householderQ() * Matrix::Identity(B.rows(), B.cols());
  const Matrix R = Qa - Qb * (Qb.transpose() * Qa);
  return Eigen::JacobiSVD<Matrix>(R).singularValues()(0);
}

/// Dense Gaussian evidence -1/2 y'C^{-1}y - 1/2 log det C - n/2 log 2 pi.
inline double dense_lml(const Matrix& C, const Vector& y) {
  Eigen::LLT<Matrix> llt(C);
  const Matrix L = llt.matrixL();
  return -0.5 * y.dot(llt.solve(y)) - L.diagonal().array().log().sum() -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * M_PI);
}

}  // namespace oracle
