#include "fairgp/reference.hpp"

#include <cmath>

#include "../kernel_entry.hpp"

namespace fairgp::serial {

Matrix gram(const KernelSpec& spec, const Matrix& X) {
  const Index n = X.rows();
  Matrix K(n, n);
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
  Matrix out(Z.rows(), X.rows());
  for (Index i = 0; i < Z.rows(); ++i)
    for (Index j = 0; j < X.rows(); ++j) out(i, j) = detail::kernel_entry(spec, Z, i, X, j);
  return out;
}

Eigen::RowVectorXd column_means(const Matrix& K) {
  Eigen::RowVectorXd means(K.cols());
  for (Index j = 0; j < K.cols(); ++j) {
    double acc = 0.0;
    for (Index i = 0; i < K.rows(); ++i) acc += K(i, j);
    means(j) = acc / static_cast<double>(K.rows());
  }
  return means;
}

Matrix center_columns(const Matrix& K) {
  const Eigen::RowVectorXd means = column_means(K);
  Matrix out(K.rows(), K.cols());
  for (Index j = 0; j < K.cols(); ++j)
    for (Index i = 0; i < K.rows(); ++i) out(i, j) = K(i, j) - means(j);
  return out;
}

std::vector<double> pairwise_distances(const Matrix& X) {
  const Index n = X.rows();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      out.push_back(std::sqrt(detail::squared_distance(X.data() + i, X.data() + j, X.cols(),
                                                       X.rows(), X.rows())));
  return out;
}

}  // namespace fairgp::serial
