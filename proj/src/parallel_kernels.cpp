#include "fairgp/parallel_kernels.hpp"

#include <cmath>

#include <omp.h>

#include "kernel_entry.hpp"

namespace fairgp::omp {

int max_threads() { return omp_get_max_threads(); }

Matrix gram(const KernelSpec& spec, const Matrix& X) {
  const Index n = X.rows();
  Matrix K(n, n);
  // Upper triangle rows shrink with i; dynamic scheduling evens the load.
#pragma omp parallel for schedule(dynamic, 16)
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double v = detail::kernel_entry(spec, X, i, X, j);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Matrix cross_gram(const KernelSpec& spec, const Matrix& Z, const Matrix& X) {
  require(Z.cols() == X.cols(), "cross_gram: feature dimension mismatch");
  const Index t = Z.rows();
  const Index n = X.rows();
  Matrix out(t, n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < t; ++i) out(i, j) = detail::kernel_entry(spec, Z, i, X, j);
  return out;
}

Eigen::RowVectorXd column_means(const Matrix& K) {
  const Index rows = K.rows();
  const Index cols = K.cols();
  Eigen::RowVectorXd means(cols);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j) {
    const double* col = K.data() + j * rows;
    double acc = 0.0;
    for (Index i = 0; i < rows; ++i) acc += col[i];
    means(j) = acc / static_cast<double>(rows);
  }
  return means;
}

Matrix center_columns(const Matrix& K) {
  const Eigen::RowVectorXd means = column_means(K);
  const Index rows = K.rows();
  const Index cols = K.cols();
  Matrix out(rows, cols);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = K(i, j) - means(j);
  return out;
}

std::vector<double> pairwise_distances(const Matrix& X) {
  const Index n = X.rows();
  std::vector<double> out(static_cast<std::size_t>(n * (n - 1) / 2));
  // Row i's block starts after the i(2n - i - 1)/2 entries of earlier rows.
#pragma omp parallel for schedule(dynamic, 16)
  for (Index i = 0; i < n; ++i) {
    std::size_t offset = static_cast<std::size_t>(i * (2 * n - i - 1) / 2);
    for (Index j = i + 1; j < n; ++j)
      out[offset++] = std::sqrt(detail::squared_distance(X.data() + i, X.data() + j, X.cols(),
                                                         X.rows(), X.rows()));
  }
  return out;
}

}  // namespace fairgp::omp
