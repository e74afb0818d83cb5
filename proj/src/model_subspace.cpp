#include "fairgp/model_subspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairgp/linalg.hpp"

namespace fairgp {

OrthonormalBasis orthonormalize(const Matrix& K, const Matrix& B, double relative_cutoff) {
  require(K.rows() == K.cols() && K.rows() == B.rows(), "orthonormalize: shape mismatch");
  require(B.cols() >= 1 && B.cwiseAbs().maxCoeff() > 0.0, "orthonormalize: zero basis");
  const Matrix G = linalg::sym(B.transpose() * (K * B));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  if (eig.info() != Eigen::Success) throw NumericalError("orthonormalize: eigen solve failed");
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double top = lambda(lambda.size() - 1);
  if (!(top > 0.0) || !std::isfinite(top))
    throw NumericalError("orthonormalize: degenerate basis (B^T K B has no positive eigenvalue)");
  const double cutoff = relative_cutoff * top;

  Index keep = 0;
  for (Index i = lambda.size() - 1; i >= 0 && lambda(i) > cutoff; --i) ++keep;

  OrthonormalBasis out;
  out.coeffs.resize(B.rows(), keep);
  out.eigvals.resize(keep);
  for (Index j = 0; j < keep; ++j) {
    const Index src = lambda.size() - 1 - j;
    out.eigvals(j) = lambda(src);
    out.coeffs.col(j) = B * eig.eigenvectors().col(src) / std::sqrt(lambda(src));
  }
  // Small eigenvalues lose digits; one pass on the nearly orthonormal result restores them.
  const Matrix C = linalg::sym(out.coeffs.transpose() * (K * out.coeffs));
  if ((C - Matrix::Identity(keep, keep)).cwiseAbs().maxCoeff() > 1e-12) {
    Eigen::SelfAdjointEigenSolver<Matrix> again(C);
    const Vector& mu = again.eigenvalues();
    if (again.info() == Eigen::Success && mu.minCoeff() > 0.0)
      out.coeffs = out.coeffs * again.eigenvectors() *
                   mu.cwiseSqrt().cwiseInverse().asDiagonal() * again.eigenvectors().transpose();
  }
  return out;
}

PrincipalPair principal_pair(const Matrix& K, const OrthonormalBasis& fair,
                             const OrthonormalBasis& predictive) {
  const Index r = fair.dim();
  const Index d = predictive.dim();
  if (d > r) {
    std::ostringstream msg;
    msg << "model_basis: predictive dimension d = " << d << " exceeds fair dimension r = " << r
        << " (requires d + m <= n)";
    throw InvalidArgument(msg.str());
  }
  const Matrix cross = fair.coeffs.transpose() * (K * predictive.coeffs);
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  PrincipalPair pair;
  pair.sigma = svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);
  pair.U = svd.matrixU();
  pair.V = svd.matrixV();
  linalg::fix_column_signs(pair.U, &pair.V);
  return pair;
}

ModelBasis model_basis(const OrthonormalBasis& fair, const OrthonormalBasis& predictive,
                       const PrincipalPair& pair, double eps) {
  require(eps >= 0.0 && eps <= 1.0, "model_basis: eps must lie in [0, 1]");
  const Index d = pair.sigma.size();
  ModelBasis mb;
  mb.epsilon = eps;
  mb.sigma = pair.sigma;
  mb.U = pair.U;
  mb.V = pair.V;
  mb.gamma.resize(d);
  mb.rho.resize(d);
  const Matrix FU = fair.coeffs * pair.U;
  const Matrix GV = predictive.coeffs * pair.V;
  mb.E.resize(fair.coeffs.rows(), d);
  for (Index i = 0; i < d; ++i) {
    const double sigma = pair.sigma(i);
    const double gamma = std::max(sigma, eps);
    const double rho =
        sigma >= 1.0 - 1e-10 ? 0.0 : std::sqrt(std::max(0.0, 1.0 - gamma * gamma) /
                                                (1.0 - sigma * sigma));
    mb.gamma(i) = gamma;
    mb.rho(i) = rho;
    mb.E.col(i) = (gamma - rho * sigma) * FU.col(i) + rho * GV.col(i);
  }
  return mb;
}

ModelBasis model_basis(const Matrix& K, const OrthonormalBasis& fair,
                       const OrthonormalBasis& predictive, double eps) {
  require(eps >= 0.0 && eps <= 1.0, "model_basis: eps must lie in [0, 1]");
  return model_basis(fair, predictive, principal_pair(K, fair, predictive), eps);
}

ProjectionGaps projection_gaps(double sigma_min, double eps) {
  require(sigma_min >= 0.0 && sigma_min <= 1.0, "projection_gaps: sigma_min must lie in [0, 1]");
  require(eps >= 0.0 && eps <= 1.0, "projection_gaps: eps must lie in [0, 1]");
  ProjectionGaps gaps;
  gaps.fair_gap = std::sqrt(1.0 - std::max(eps * eps, sigma_min * sigma_min));
  gaps.pred_gap = std::max(0.0, eps * std::sqrt(1.0 - sigma_min * sigma_min) -
                                    sigma_min * std::sqrt(1.0 - eps * eps));
  return gaps;
}

double empirical_projection_gap(const Matrix& K, const Matrix& basis_a, const Matrix& basis_b,
                                double tolerance) {
  require(basis_a.rows() == K.rows() && basis_b.rows() == K.rows(),
          "empirical_projection_gap: shape mismatch");
  const double defect_a = linalg::orthonormality_defect(K, basis_a);
  const double defect_b = linalg::orthonormality_defect(K, basis_b);
  if (defect_a > tolerance || defect_b > tolerance) {
    std::ostringstream msg;
    msg << "empirical_projection_gap: basis not RKHS-orthonormal (defects " << defect_a << ", "
        << defect_b << ")";
    throw InvalidArgument(msg.str());
  }
  // Residual of the smaller basis after projecting onto the larger one; its
  // largest RKHS norm is the sine of the largest principal angle. Working
  // with the residual keeps small sines accurate.
  const bool a_small = basis_a.cols() <= basis_b.cols();
  const Matrix& small = a_small ? basis_a : basis_b;
  const Matrix& big = a_small ? basis_b : basis_a;
  if (small.cols() == 0) return 0.0;
  const Matrix residual = small - big * (big.transpose() * (K * small));
  const Matrix gram = linalg::sym(residual.transpose() * (K * residual));
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  return std::min(1.0, std::sqrt(std::max(0.0, top)));
}

}  // namespace fairgp
