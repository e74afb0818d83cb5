#pragma once

// Single-threaded reference versions of the OpenMP kernels. They are the
// ground truth for the parallel implementations in tests and benchmarks.

#include "fairgp/kernel.hpp"

namespace fairgp::serial {

Matrix gram(const KernelSpec& spec, const Matrix& X);
Matrix cross_gram(const KernelSpec& spec, const Matrix& Z, const Matrix& X);
Matrix center_columns(const Matrix& K);
Eigen::RowVectorXd column_means(const Matrix& K);
/// Upper-triangle pairwise distances, row-major order (i < j).
std::vector<double> pairwise_distances(const Matrix& X);

}  // namespace fairgp::serial
