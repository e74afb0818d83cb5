#pragma once

#include <string>

#include "fairgp/common.hpp"

namespace fairgp {

enum class KernelFamily { RBF, Linear };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Kernel choice and its hyperparameters. Immutable once constructed.
class KernelSpec {
 public:
  /// variance * exp(-|x - z|^2 / (2 lengthscale^2))
  static KernelSpec rbf(double lengthscale, double variance = 1.0);
  /// variance * <x, z>
  static KernelSpec linear(double variance = 1.0);

  KernelFamily family() const { return family_; }
  double lengthscale() const { return lengthscale_; }
  double variance() const { return variance_; }

  bool operator==(const KernelSpec&) const = default;

 private:
  KernelSpec(KernelFamily family, double lengthscale, double variance);

  KernelFamily family_;
  double lengthscale_;
  double variance_;
};

double eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
            const Eigen::Ref<const Vector>& z);

/// n x n Gram matrix over the rows of X. Rows are computed in parallel; the
/// result is bit-identical to the serial reference.
Matrix gram(const KernelSpec& spec, const Matrix& X);

/// t x n matrix with entry (i, j) = eval(spec, Z.row(i), X.row(j)).
Matrix cross_gram(const KernelSpec& spec, const Matrix& Z, const Matrix& X);

/// K minus its column means broadcast over rows, i.e. Gamma_n * K without
/// forming the centering matrix.
Matrix center_columns(const Matrix& K);

/// 1 x n row of column means (1_n^T K / n).
Eigen::RowVectorXd column_means(const Matrix& K);

/// Median of the pairwise Euclidean distances between distinct rows of X.
/// Rows beyond max_rows are ignored (deterministic prefix subsample).
double median_pairwise_distance(const Matrix& X, Index max_rows = 3000);

}  // namespace fairgp
