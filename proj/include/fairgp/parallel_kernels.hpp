#pragma once

// OpenMP data-parallel loops. Every output element is computed by exactly one
// thread with a fixed reduction order, so results do not depend on the thread
// count.

#include <vector>

#include "fairgp/kernel.hpp"

namespace fairgp::omp {

Matrix gram(const KernelSpec& spec, const Matrix& X);
Matrix cross_gram(const KernelSpec& spec, const Matrix& Z, const Matrix& X);
Matrix center_columns(const Matrix& K);
Eigen::RowVectorXd column_means(const Matrix& K);
std::vector<double> pairwise_distances(const Matrix& X);

int max_threads();

}  // namespace fairgp::omp
