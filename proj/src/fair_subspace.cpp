#include "fairgp/fair_subspace.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "fairgp/kernel.hpp"

namespace fairgp {

std::string to_string(FairnessCriterion criterion) {
  switch (criterion) {
    case FairnessCriterion::StatisticalParity: return "sp";
    case FairnessCriterion::EqualityOfOpportunity: return "eop";
    case FairnessCriterion::EqualizedOdds: return "eo";
  }
  return "sp";
}

FairnessCriterion criterion_from_string(const std::string& name) {
  if (name == "sp") return FairnessCriterion::StatisticalParity;
  if (name == "eop") return FairnessCriterion::EqualityOfOpportunity;
  if (name == "eo") return FairnessCriterion::EqualizedOdds;
  throw InvalidArgument("unknown fairness criterion '" + name + "' (expected sp, eop or eo)");
}

namespace {

std::vector<Index> rows_where(const Vector& y, bool positive) {
  std::vector<Index> rows;
  for (Index i = 0; i < y.size(); ++i)
    if ((y(i) == 1.0) == positive) rows.push_back(i);
  return rows;
}

Index slices_for(const ProtectedSdrOptions& options, Index column, const Vector& s) {
  if (column < static_cast<Index>(options.slices.size()) && options.slices[column] > 0)
    return std::min(options.slices[column], s.size());
  const bool categorical = column < static_cast<Index>(options.kinds.size()) &&
                           options.kinds[column] == AttributeKind::Categorical;
  return default_slice_count(s, categorical);
}

// SDR on the principal submatrix K(rows, rows), scattered back into n rows.
SdrResult subset_block(const Matrix& K, const Vector& s, const std::vector<Index>& rows,
                       const ProtectedSdrOptions& options, Index column) {
  const auto k = static_cast<Index>(rows.size());
  Matrix Ksub(k, k);
  Vector ssub(k);
  for (Index a = 0; a < k; ++a) {
    ssub(a) = s(rows[a]);
    for (Index b = 0; b < k; ++b) Ksub(a, b) = K(rows[a], rows[b]);
  }
  const Index m_sub = std::min(options.m, k);
  SdrResult sub = sdr_subspace(Ksub, ssub, m_sub, slices_for(options, column, ssub), options.sdr);
  SdrResult full;
  full.eta = sub.eta;
  full.informative = sub.informative;
  full.solver_iterations = sub.solver_iterations;
  full.W = Matrix::Zero(K.rows(), options.m);
  full.tau = Vector::Zero(options.m);
  full.tau.head(m_sub) = sub.tau;
  for (Index a = 0; a < k; ++a) full.W.row(rows[a]).head(m_sub) = sub.W.row(a);
  return full;
}

}  // namespace

ProtectedUnion protected_sdr_union(const Matrix& K, const Vector& y, const Matrix& S,
                                   FairnessCriterion criterion,
                                   const ProtectedSdrOptions& options) {
  const Index n = K.rows();
  require(K.cols() == n, "protected_sdr_union: K must be square");
  require(S.rows() == n, "protected_sdr_union: S rows do not match K");
  require(S.cols() >= 1, "protected_sdr_union: need at least one protected attribute");
  require(options.m >= 1, "protected_sdr_union: m must be >= 1");

  std::vector<Index> pos;
  std::vector<Index> neg;
  const bool conditional = criterion != FairnessCriterion::StatisticalParity;
  if (conditional) {
    require(y.size() == n, "protected_sdr_union: label length does not match K");
    for (Index i = 0; i < n; ++i)
      require(y(i) == 0.0 || y(i) == 1.0,
              "protected_sdr_union: " + to_string(criterion) + " requires binary labels in {0,1}");
    pos = rows_where(y, true);
    neg = rows_where(y, false);
    if (pos.empty()) throw InvalidArgument("protected_sdr_union: positive class (Y=1) is empty");
    if (criterion == FairnessCriterion::EqualizedOdds && neg.empty())
      throw InvalidArgument("protected_sdr_union: negative class (Y=0) is empty");
  }

  const Index per_column = criterion == FairnessCriterion::EqualizedOdds ? 2 : 1;
  ProtectedUnion out;
  out.W = Matrix::Zero(n, S.cols() * per_column * options.m);
  Index col = 0;
  for (Index j = 0; j < S.cols(); ++j) {
    const Vector s = S.col(j);
    const std::string name = "s" + std::to_string(j);
    if (!conditional) {
      out.blocks.push_back(sdr_subspace(K, s, options.m, slices_for(options, j, s), options.sdr));
      out.labels.push_back(name);
    } else {
      out.blocks.push_back(subset_block(K, s, pos, options, j));
      out.labels.push_back(name + "|y=1");
      if (criterion == FairnessCriterion::EqualizedOdds) {
        out.blocks.push_back(subset_block(K, s, neg, options, j));
        out.labels.push_back(name + "|y=0");
      }
    }
  }
  for (const SdrResult& block : out.blocks) {
    out.W.middleCols(col, options.m) = block.W;
    col += options.m;
  }
  return out;
}

FairBasis fair_nullspace(const Matrix& K, const Matrix& W) {
  const Index n = K.rows();
  require(K.cols() == n, "fair_nullspace: K must be square");
  require(W.rows() == n, "fair_nullspace: W rows do not match K");

  FairBasis basis;
  basis.W = W;
  const Matrix Kc = center_columns(K);
  const Matrix KtW = Kc.transpose() * (Kc * W);

  Index rank = 0;
  if (KtW.cols() > 0) {
    const Vector sv = Eigen::JacobiSVD<Matrix>(KtW).singularValues();
    const double cutoff = static_cast<double>(std::max(n, KtW.cols())) *
                          (sv.size() > 0 ? sv(0) : 0.0) *
                          std::numeric_limits<double>::epsilon();
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  }
  if (rank >= n)
    throw NumericalError("fair subspace empty: the fairness constraints have rank n = " +
                         std::to_string(n));
  basis.constraint_rank = rank;
  basis.r = n - rank;
  if (rank == 0) {
    basis.Q = Matrix::Identity(n, n);
    return basis;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(KtW);
  Matrix tail = Matrix::Zero(n, n - rank);
  tail.bottomRows(n - rank).setIdentity();
  basis.Q = qr.householderQ() * tail;
  return basis;
}

double fairness_residual(const Matrix& K, const Matrix& W, const Matrix& Q) {
  if (W.cols() == 0 || Q.cols() == 0) return 0.0;
  const Matrix Kc = center_columns(K);
  return ((Kc * W).transpose() * (Kc * Q)).cwiseAbs().maxCoeff();
}

Prop1Report verify_prop1_synthetic(const Prop1Config& config) {
  require(config.n >= 2 && config.p >= 2, "verify_prop1_synthetic: need n >= 2 and p >= 2");
  const Index n = config.n;
  const Index p = config.p;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix Sigma(p, p);
  for (Index a = 0; a < p; ++a)
    for (Index b = 0; b < p; ++b)
      Sigma(a, b) = std::pow(config.correlation, static_cast<double>(std::abs(a - b)));
  const Matrix L = Eigen::LLT<Matrix>(Sigma).matrixL();

  Matrix X(n, p);
  for (Index i = 0; i < n; ++i) {
    Vector z(p);
    for (Index k = 0; k < p; ++k) z(k) = normal(rng);
    X.row(i) = (L * z).transpose();
  }
  Vector s(n);
  for (Index i = 0; i < n; ++i) {
    const double link = config.dependent ? (X(i, 0) >= 0.0 ? 1.0 : -1.0) : normal(rng);
    s(i) = link + config.noise * normal(rng);
  }

  // C spans the complement of Sigma B; with B = 0 every direction is fair.
  Matrix C;
  if (config.dependent) {
    Vector b = Vector::Zero(p);
    b(0) = 1.0;
    const Vector sb = Sigma * b;
    Eigen::HouseholderQR<Matrix> qr{Matrix(sb)};
    C = (qr.householderQ() * Matrix::Identity(p, p)).rightCols(p - 1);
  } else {
    C = Matrix::Identity(p, p);
  }

  const Matrix P = X * C;
  const Matrix centered = P.rowwise() - P.colwise().mean();
  const Vector sc = s.array() - s.mean();
  Prop1Report report;
  report.n = n;
  for (Index j = 0; j < centered.cols(); ++j) {
    const Eigen::ArrayXd prod = centered.col(j).array() * sc.array();
    const double cov = prod.mean();
    const double sd = std::sqrt((prod - prod.mean()).square().sum() / static_cast<double>(n - 1));
    report.sample_cov_norm = std::max(report.sample_cov_norm, std::abs(cov));
    report.sigma_hat = std::max(report.sigma_hat, sd);
  }
  report.bound = 3.0 * report.sigma_hat / std::sqrt(static_cast<double>(n));
  return report;
}

RateReport prop1_rate(const std::vector<Index>& sizes, int replicates, std::uint64_t seed,
                      const Prop1Config& base) {
  require(sizes.size() >= 2, "prop1_rate: need at least two sample sizes");
  require(replicates >= 1, "prop1_rate: need at least one replicate");
  RateReport report;
  report.sizes = sizes;
  std::uint64_t next_seed = seed;
  for (Index n : sizes) {
    double acc = 0.0;
    for (int r = 0; r < replicates; ++r) {
      Prop1Config cfg = base;
      cfg.n = n;
      cfg.seed = next_seed++;
      acc += verify_prop1_synthetic(cfg).sample_cov_norm;
    }
    report.mean_cov_norm.push_back(acc / replicates);
  }
  const auto k = static_cast<double>(sizes.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    mx += std::log(static_cast<double>(sizes[i])) / k;
    my += std::log(report.mean_cov_norm[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double dx = std::log(static_cast<double>(sizes[i])) - mx;
    sxy += dx * (std::log(report.mean_cov_norm[i]) - my);
    sxx += dx * dx;
  }
  report.slope = sxy / sxx;
  return report;
}

}  // namespace fairgp
