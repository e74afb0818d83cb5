#pragma once

// Scalar kernel evaluation shared by the serial and OpenMP loops so both
// produce identical bits.

#include <cmath>

#include "fairgp/kernel.hpp"

namespace fairgp::detail {

inline double squared_distance(const double* x, const double* z, Index p, Index x_stride,
                               Index z_stride) {
  double acc = 0.0;
  for (Index k = 0; k < p; ++k) {
    const double diff = x[k * x_stride] - z[k * z_stride];
    acc += diff * diff;
  }
  return acc;
}

inline double dot(const double* x, const double* z, Index p, Index x_stride, Index z_stride) {
  double acc = 0.0;
  for (Index k = 0; k < p; ++k) acc += x[k * x_stride] * z[k * z_stride];
  return acc;
}

// Rows of column-major Eigen matrices: stride is the number of rows.
inline double kernel_entry(const KernelSpec& spec, const Matrix& A, Index i, const Matrix& B,
                           Index j) {
  const Index p = A.cols();
  const double* a = A.data() + i;
  const double* b = B.data() + j;
  if (spec.family() == KernelFamily::RBF) {
    const double sq = squared_distance(a, b, p, A.rows(), B.rows());
    const double l = spec.lengthscale();
    return spec.variance() * std::exp(-sq / (2.0 * l * l));
  }
  return spec.variance() * dot(a, b, p, A.rows(), B.rows());
}

}  // namespace fairgp::detail
