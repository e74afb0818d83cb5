#include "fairgp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fairgp::linalg {

double spectral_norm_sym(const Matrix& M, int iterations) {
  const Index n = M.rows();
  if (n == 0) return 0.0;
  // Deterministic, non-degenerate start vector.
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = 1.0 + 0.1 * std::sin(static_cast<double>(i) + 1.0);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = M * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double previous = estimate;
    estimate = norm;
    v = w / norm;
    if (std::abs(estimate - previous) <= 1e-12 * estimate) break;
  }
  return estimate;
}

void fix_column_signs(Matrix& primary, Matrix* paired) {
  for (Index j = 0; j < primary.cols(); ++j) {
    Index arg = 0;
    primary.col(j).cwiseAbs().maxCoeff(&arg);
    if (primary(arg, j) < 0.0) {
      primary.col(j) *= -1.0;
      if (paired != nullptr && j < paired->cols()) paired->col(j) *= -1.0;
    }
  }
}

CgResult shifted_cg(const Matrix& K, double shift, const Matrix& B, double tolerance,
                    int max_iterations) {
  require(K.rows() == K.cols() && K.rows() == B.rows(), "shifted_cg: shape mismatch");
  require(shift > 0.0, "shifted_cg: shift must be positive");
  const Index n = B.rows();
  const Index k = B.cols();
  CgResult result;
  result.solution = Matrix::Zero(n, k);
  Matrix R = B;
  Matrix P = R;
  Vector rr = R.colwise().squaredNorm().transpose();
  const Vector b_norm = B.colwise().norm().transpose();
  std::vector<bool> active(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) active[j] = b_norm(j) > 0.0;

  auto all_done = [&] {
    return std::none_of(active.begin(), active.end(), [](bool a) { return a; });
  };

  int it = 0;
  while (!all_done() && it < max_iterations) {
    Matrix KP = K * P;
    KP += shift * P;
    for (Index j = 0; j < k; ++j) {
      if (!active[j]) continue;
      const double denom = P.col(j).dot(KP.col(j));
      if (!(denom > 0.0)) {
        active[j] = false;
        continue;
      }
      const double alpha = rr(j) / denom;
      result.solution.col(j) += alpha * P.col(j);
      R.col(j) -= alpha * KP.col(j);
      const double rr_new = R.col(j).squaredNorm();
      if (std::sqrt(rr_new) <= tolerance * b_norm(j)) {
        active[j] = false;
        rr(j) = rr_new;
        continue;
      }
      P.col(j) = R.col(j) + (rr_new / rr(j)) * P.col(j);
      rr(j) = rr_new;
    }
    ++it;
  }
  result.iterations = it;

  // Report the true residual, not the recursively updated one.
  Matrix residual = B - (K * result.solution + shift * result.solution);
  double worst = 0.0;
  for (Index j = 0; j < k; ++j)
    if (b_norm(j) > 0.0) worst = std::max(worst, residual.col(j).norm() / b_norm(j));
  result.max_relative_residual = worst;
  result.converged = worst <= 10.0 * tolerance;
  return result;
}

Matrix orthonormal_range(const Matrix& M, double relative_cutoff) {
  if (M.cols() == 0) return Matrix(M.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double cutoff = relative_cutoff * (s.size() > 0 ? s(0) : 0.0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

Vector principal_cosines(const Matrix& K, const Matrix& A, const Matrix& B) {
  const Matrix cross = A.transpose() * (K * B);
  if (cross.size() == 0) return Vector();
  Vector s = Eigen::JacobiSVD<Matrix>(cross).singularValues();
  return s.cwiseMax(0.0).cwiseMin(1.0);
}

double orthonormality_defect(const Matrix& K, const Matrix& A) {
  if (A.cols() == 0) return 0.0;
  const Matrix G = A.transpose() * (K * A);
  return (G - Matrix::Identity(A.cols(), A.cols())).cwiseAbs().maxCoeff();
}

}  // namespace fairgp::linalg
