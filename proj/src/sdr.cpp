#include "fairgp/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "fairgp/kernel.hpp"
#include "fairgp/linalg.hpp"

namespace fairgp {

SlicePartition slice_by_target(const Vector& s, Index H) {
  require(H >= 1, "slice_by_target: slice count must be >= 1");
  const Index n = s.size();
  require(n >= 1, "slice_by_target: empty target");
  require(H <= n, "slice_by_target: more slices than observations");

  SlicePartition part;
  part.sorted_index.resize(static_cast<std::size_t>(n));
  std::iota(part.sorted_index.begin(), part.sorted_index.end(), Index{0});
  std::stable_sort(part.sorted_index.begin(), part.sorted_index.end(),
                   [&](Index a, Index b) { return s(a) < s(b); });
  part.inverse_index.resize(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) part.inverse_index[part.sorted_index[r]] = r;

  // Tie groups as [begin, end) ranges in sorted order.
  std::vector<std::pair<Index, Index>> groups;
  for (Index r = 0; r < n;) {
    Index e = r + 1;
    while (e < n && s(part.sorted_index[e]) == s(part.sorted_index[r])) ++e;
    groups.emplace_back(r, e);
    r = e;
  }

  Index remaining = n;
  Index slices_left = H;
  Index current = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    current += groups[g].second - groups[g].first;
    if (slices_left <= 1 || g + 1 == groups.size()) continue;
    const double target = static_cast<double>(remaining) / static_cast<double>(slices_left);
    const Index next = groups[g + 1].second - groups[g + 1].first;
    const double gap_now = std::abs(static_cast<double>(current) - target);
    const double gap_next = std::abs(static_cast<double>(current + next) - target);
    if (static_cast<double>(current) >= target || gap_now <= gap_next) {
      part.slice_sizes.push_back(current);
      remaining -= current;
      --slices_left;
      current = 0;
    }
  }
  if (current > 0) part.slice_sizes.push_back(current);

  part.slice_of.resize(static_cast<std::size_t>(n));
  Index r = 0;
  for (Index h = 0; h < part.slice_count(); ++h)
    for (Index c = 0; c < part.slice_sizes[h]; ++c, ++r) part.slice_of[part.sorted_index[r]] = h;
  return part;
}

Matrix between_slice_basis(const SlicePartition& partition) {
  const Index slices = partition.slice_count();
  const Index n = static_cast<Index>(partition.slice_of.size());
  if (slices <= 1) return Matrix(n, 0);
  // In the orthonormal indicator basis u_h = 1_h / sqrt(n_h), the constant
  // vector has coordinates sqrt(n_h / n); its orthogonal complement spans the
  // between-slice directions.
  Vector c(slices);
  for (Index h = 0; h < slices; ++h)
    c(h) = std::sqrt(static_cast<double>(partition.slice_sizes[h]) / static_cast<double>(n));
  Eigen::HouseholderQR<Matrix> qr{Matrix(c)};
  const Matrix full = qr.householderQ() * Matrix::Identity(slices, slices);
  const Matrix N = full.rightCols(slices - 1);
  Matrix Z(n, slices - 1);
  for (Index i = 0; i < n; ++i) {
    const Index h = partition.slice_of[i];
    Z.row(i) = N.row(h) / std::sqrt(static_cast<double>(partition.slice_sizes[h]));
  }
  return Z;
}

namespace {

// Applies (K + shift I)^{-1} to the columns of B.
Matrix shifted_solve(const Matrix& K, double shift, const Matrix& B, const SdrOptions& options,
                     int& iterations) {
  const Index n = K.rows();
  if (options.solver == SdrSolver::Iterative) {
    const int max_it = options.cg_max_iterations > 0
                           ? options.cg_max_iterations
                           : static_cast<int>(std::max<Index>(500, 2 * n));
    linalg::CgResult cg = linalg::shifted_cg(K, shift, B, options.cg_tolerance, max_it);
    iterations = cg.iterations;
    if (cg.converged) return cg.solution;
    // Poorly conditioned pencil; fall through to the direct factorization.
  }
  Matrix M = K;
  M.diagonal().array() += shift;
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sdr_subspace: K + n*eta*I is not positive definite (n*eta = " << shift << ")";
    throw NumericalError(msg.str());
  }
  return llt.solve(B);
}

}  // namespace

SdrResult sdr_subspace(const Matrix& K, const Vector& s, Index m, Index H,
                       const SdrOptions& options) {
  const Index n = K.rows();
  require(K.cols() == n, "sdr_subspace: K must be square");
  require(s.size() == n, "sdr_subspace: target length does not match K");
  require(m >= 1 && m <= n, "sdr_subspace: need 1 <= m <= n");
  require(options.eta > 0.0, "sdr_subspace: eta must be positive");
  require(s.allFinite(), "sdr_subspace: target contains non-finite values");

  SdrResult result;
  result.eta = options.eta;
  result.W = Matrix::Zero(n, m);
  result.tau = Vector::Zero(m);

  const SlicePartition part = slice_by_target(s, std::min(H, n));
  const Matrix Z = between_slice_basis(part);
  const Index h = Z.cols();
  if (h == 0) return result;

  // (Gamma_n K + n eta I) = (K + n eta I) - 1 k^T with k^T = 1^T K / n.
  // Sherman-Morrison turns its inverse into two solves against K + n eta I.
  const double shift = static_cast<double>(n) * options.eta;
  Matrix rhs(n, h + 1);
  rhs.leftCols(h) = Z;
  rhs.col(h).setOnes();
  const Matrix Y = shifted_solve(K, shift, rhs, options, result.solver_iterations);
  const Eigen::RowVectorXd k = column_means(K);
  const double denom = 1.0 - k.dot(Y.col(h));
  if (!(std::abs(denom) > 0.0) || !std::isfinite(denom))
    throw NumericalError("sdr_subspace: singular rank-one update (eta = " +
                         std::to_string(options.eta) + ")");
  const Matrix T = Y.leftCols(h) + Y.col(h) * ((k * Y.leftCols(h)) / denom);

  const Matrix reduced = linalg::sym(Z.transpose() * (K * T));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
  if (eig.info() != Eigen::Success || !eig.eigenvalues().allFinite())
    throw NumericalError("sdr_subspace: eigen solve failed (eta = " +
                         std::to_string(options.eta) + ")");

  const double tau_floor = 1e-13;
  const Index keep = std::min(m, h);
  for (Index j = 0; j < keep; ++j) {
    const Index src = h - 1 - j;  // eigenvalues ascend
    const double tau = eig.eigenvalues()(src);
    if (!(tau > tau_floor)) break;
    result.tau(j) = tau;
    result.W.col(j) = T * eig.eigenvectors().col(src) / std::sqrt(tau);
    ++result.informative;
  }
  if (!result.W.allFinite())
    throw NumericalError("sdr_subspace: non-finite basis (eta = " +
                         std::to_string(options.eta) + ")");
  linalg::fix_column_signs(result.W);
  return result;
}

Index select_dimension(const Vector& tau, Index max_dim, double threshold) {
  require(tau.size() > 0, "select_dimension: empty eigenvalue list");
  require(max_dim >= 1 && max_dim <= tau.size(), "select_dimension: max_dim out of range");
  Index d = 0;
  while (d < max_dim && tau(d) >= threshold) ++d;
  return std::max<Index>(d, 1);
}

Index default_slice_count(const Vector& s, bool categorical) {
  std::set<double> distinct(s.data(), s.data() + s.size());
  const auto count = static_cast<Index>(distinct.size());
  return categorical ? std::max<Index>(count, 1) : std::max<Index>(std::min<Index>(10, count), 1);
}

}  // namespace fairgp
