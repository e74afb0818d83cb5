#pragma once

#include <vector>

#include "fairgp/common.hpp"

namespace fairgp {

/// Contiguous partition of the target-sorted sample.
struct SlicePartition {
  std::vector<Index> sorted_index;   // s(sorted_index) is non-decreasing
  std::vector<Index> inverse_index;  // sorted_index[inverse_index[i]] == i
  std::vector<Index> slice_sizes;    // sum == n
  std::vector<Index> slice_of;       // slice id of each original observation

  Index slice_count() const { return static_cast<Index>(slice_sizes.size()); }
};

/// Sorts s and cuts it into at most H approximately equal slices. Tied values
/// always share a slice, so fewer than H slices come back when ties are large.
SlicePartition slice_by_target(const Vector& s, Index H);

enum class SdrSolver {
  Iterative,  // conjugate gradients on K + n*eta*I, O(n^2) per iteration
  Dense,      // Cholesky of K + n*eta*I, O(n^3)
};

struct SdrOptions {
  double eta = 1e-4;
  SdrSolver solver = SdrSolver::Iterative;
  double cg_tolerance = 1e-12;
  int cg_max_iterations = 0;  // 0 selects max(500, 2n)
};

/// Estimated SDR basis in the RKHS spanned by the training feature functions.
struct SdrResult {
  Matrix W;      // n x m coefficients; column i is the direction phi * W_i
  Vector tau;    // m eigenvalues in [0, 1), non-increasing
  double eta = 0.0;
  Index informative = 0;  // number of nonzero columns (at most slices - 1)
  int solver_iterations = 0;
};

/// Kernel sliced inverse regression of s on the feature functions of K.
///
/// Solves the symmetric pencil
///   K (Gamma_n - Delta_s) K a = tau (K Gamma_n K + n eta K) a,
/// where Delta_s is the block-diagonal within-slice centering of the
/// target-sorted sample. Gamma_n - Delta_s projects onto the between-slice
/// means, so tau is the fraction of (regularized) variance of phi*a explained
/// by the slicing and at most (slices - 1) eigenvalues are nonzero. Columns
/// past that rank are returned as zero with tau = 0.
///
/// Nonzero columns are scaled so a^T (K Gamma_n K + n eta K) a = 1 and signed so
/// their largest-magnitude entry is positive.
SdrResult sdr_subspace(const Matrix& K, const Vector& s, Index m, Index H,
                       const SdrOptions& options = {});

/// Largest d <= max_dim with tau[d-1] >= threshold; 1 when none qualifies.
Index select_dimension(const Vector& tau, Index max_dim, double threshold);

/// Number of distinct values for categorical targets, min(10, distinct)
/// otherwise.
Index default_slice_count(const Vector& s, bool categorical);

/// Between-slice orthonormal basis (n x (slices - 1)) used by sdr_subspace.
Matrix between_slice_basis(const SlicePartition& partition);

}  // namespace fairgp
