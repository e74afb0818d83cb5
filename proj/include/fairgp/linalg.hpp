#pragma once

#include "fairgp/common.hpp"

namespace fairgp::linalg {

inline Matrix sym(const Matrix& M) { return 0.5 * (M + M.transpose()); }

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
double spectral_norm_sym(const Matrix& M, int iterations = 100);

/// Flip column signs so the largest-magnitude entry of each column of `primary`
/// is positive; the same flips are applied to `paired` when given.
void fix_column_signs(Matrix& primary, Matrix* paired = nullptr);

struct CgResult {
  Matrix solution;
  int iterations = 0;
  bool converged = false;
  double max_relative_residual = 0.0;
};

/// Solves (K + shift I) X = B column-by-column with conjugate gradients. The
/// matrix products for all active columns are batched into one GEMM per
/// iteration. K must be symmetric positive semidefinite and shift > 0.
CgResult shifted_cg(const Matrix& K, double shift, const Matrix& B, double tolerance,
                    int max_iterations);

/// Columns of an orthonormal (Euclidean) basis for range(M) using a
/// relative singular-value cutoff.
Matrix orthonormal_range(const Matrix& M, double relative_cutoff);

/// Singular values of A^T K B, clamped into [0, 1], non-increasing.
Vector principal_cosines(const Matrix& K, const Matrix& A, const Matrix& B);

/// max |A^T K A - I|.
double orthonormality_defect(const Matrix& K, const Matrix& A);

}  // namespace fairgp::linalg
