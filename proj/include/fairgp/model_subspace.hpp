#pragma once

#include "fairgp/common.hpp"

namespace fairgp {

/// Coefficients C with {phi C_i} orthonormal in the RKHS: C^T K C = I.
struct OrthonormalBasis {
  Matrix coeffs;  // n x d
  Vector eigvals; // eigenvalues of B^T K B kept in the scaling, descending
  Index dim() const { return coeffs.cols(); }
};

/// Eigendecomposes B^T K B, drops eigenvalues at or below
/// relative_cutoff * (largest eigenvalue) and returns B V diag(lambda^{-1/2}).
OrthonormalBasis orthonormalize(const Matrix& K, const Matrix& B,
                                double relative_cutoff = 1e-10);

/// Basis of the model subspace M interpolating between the fair subspace F
/// (eps = 1) and the predictive subspace G (eps = 0).
struct ModelBasis {
  Matrix E;        // n x d, E^T K E = I
  Vector sigma;    // cosines of the principal angles between F and G, in [0, 1]
  Vector gamma;    // max(sigma_i, eps)
  Vector rho;
  Matrix U;        // r x d left singular vectors (F side)
  Matrix V;        // d x d right singular vectors (G side)
  double epsilon = 0.0;

  double sigma_min() const { return sigma.size() ? sigma.minCoeff() : 0.0; }
};

/// Cross-Gram SVD of the two orthonormal bases, shared by every eps.
struct PrincipalPair {
  Vector sigma;
  Matrix U;
  Matrix V;
};

/// Thin SVD of F^T K G with deterministic signs. Requires dim(G) <= dim(F).
PrincipalPair principal_pair(const Matrix& K, const OrthonormalBasis& fair,
                             const OrthonormalBasis& predictive);

/// E_i = (gamma_i - rho_i sigma_i) F U_i + rho_i G V_i with gamma_i = max(sigma_i, eps)
/// and rho_i = sqrt((1 - gamma_i^2) / (1 - sigma_i^2)) (0 when sigma_i = 1).
ModelBasis model_basis(const Matrix& K, const OrthonormalBasis& fair,
                       const OrthonormalBasis& predictive, double eps);

/// Same construction from a precomputed principal pair.
ModelBasis model_basis(const OrthonormalBasis& fair, const OrthonormalBasis& predictive,
                       const PrincipalPair& pair, double eps);

struct ProjectionGaps {
  double fair_gap = 0.0;  // ||P_F - P_M||
  double pred_gap = 0.0;  // ||P_G - P_M||
};

/// Closed-form gaps: fair = sqrt(1 - max(eps^2, sigma_min^2)),
/// pred = max(0, eps sqrt(1 - sigma_min^2) - sigma_min sqrt(1 - eps^2)).
ProjectionGaps projection_gaps(double sigma_min, double eps);

/// Sine of the largest principal angle between two RKHS-orthonormal bases,
/// taken over the min(d_a, d_b) angles. For equal dimensions this is
/// ||P_A - P_B||; otherwise it is ||(I - P_big) P_small||. Throws when a basis
/// is not orthonormal within `tolerance`.
double empirical_projection_gap(const Matrix& K, const Matrix& basis_a, const Matrix& basis_b,
                                double tolerance = 1e-6);

}  // namespace fairgp
