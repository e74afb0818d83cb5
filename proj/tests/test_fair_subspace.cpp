#include <doctest.h>

#include <random>

#include "fairgp/fair_subspace.hpp"
#include "fairgp/kernel.hpp"
#include "oracles.hpp"

using namespace fairgp;

namespace {

Matrix rbf_gram(const Matrix& X) { return gram(KernelSpec::rbf(median_pairwise_distance(X)), X); }

// Euclidean orthonormal complement of range(M) from a full SVD.
Matrix complement(const Matrix& M, Index rank) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(M.rows() - rank);
}

}  // namespace

TEST_CASE("criterion names round-trip") {
  for (auto c : {FairnessCriterion::StatisticalParity, FairnessCriterion::EqualityOfOpportunity,
                 FairnessCriterion::EqualizedOdds})
    CHECK(criterion_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(criterion_from_string("parity"), InvalidArgument);
}

TEST_CASE("identity kernel with one constraint") {
  const Index n = 4;
  Matrix W = Matrix::Zero(n, 1);
  W(0, 0) = 1.0;
  const FairBasis b = fair_nullspace(Matrix::Identity(n, n), W);
  CHECK(b.constraint_rank == 1);
  CHECK(b.r == 3);
  Vector v(4);
  v << 0.75, -0.25, -0.25, -0.25;
  CHECK((b.Q.transpose() * v).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((b.Q.transpose() * b.Q - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("empty constraint set keeps the whole space") {
  const FairBasis b = fair_nullspace(Matrix::Identity(5, 5), Matrix::Zero(5, 2));
  CHECK(b.r == 5);
  CHECK(b.constraint_rank == 0);
  CHECK(b.Q == Matrix::Identity(5, 5));
}

TEST_CASE("fair nullspace is orthonormal, feasible and complete") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Index n = 10 + 3 * t;
    const Index k = 1 + t % 4;
    const Matrix K = rbf_gram(oracle::gaussian(rng, n, 3));
    const Matrix W = oracle::gaussian(rng, n, k);
    const FairBasis b = fair_nullspace(K, W);
    CHECK(b.r + b.constraint_rank == n);
    CHECK(b.constraint_rank == k);
    CHECK((b.Q.transpose() * b.Q - Matrix::Identity(b.r, b.r)).cwiseAbs().maxCoeff() <= 1e-10);
    const Matrix G = oracle::centering(n);
    const Matrix constraint = K * G * K * W;
    CHECK((W.transpose() * K * G * K * b.Q).cwiseAbs().maxCoeff() <= 1e-10 * K.norm() * K.norm());
    CHECK(fairness_residual(K, W, b.Q) <= 1e-10 * K.norm() * K.norm());
    CHECK(oracle::span_distance(b.Q, complement(constraint, k)) <= 1e-8);
  }
}

TEST_CASE("statistical parity union equals separate per-attribute fits") {
  std::mt19937_64 rng(8);
  const Index n = 80;
  const Matrix X = oracle::gaussian(rng, n, 3);
  const Matrix K = rbf_gram(X);
  Matrix S(n, 2);
  S.col(0) = X.col(0) + 0.3 * oracle::gaussian(rng, n, 1);
  for (Index i = 0; i < n; ++i) S(i, 1) = static_cast<double>(i % 3);
  ProtectedSdrOptions opt;
  opt.m = 2;
  opt.kinds = {AttributeKind::Continuous, AttributeKind::Categorical};
  opt.sdr.eta = 0.01;
  const ProtectedUnion u =
      protected_sdr_union(K, Vector::Zero(n), S, FairnessCriterion::StatisticalParity, opt);
  REQUIRE(u.W.cols() == 4);
  CHECK(u.labels.size() == 2);
  const SdrResult a = sdr_subspace(K, S.col(0), 2, 10, opt.sdr);
  const SdrResult c = sdr_subspace(K, S.col(1), 2, 3, opt.sdr);
  CHECK((u.W.leftCols(2) - a.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((u.W.rightCols(2) - c.W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("opportunity blocks are zero-padded outside their class") {
  std::mt19937_64 rng(12);
  const Index n = 40;
  const Matrix X = oracle::gaussian(rng, n, 2);
  const Matrix K = rbf_gram(X);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = i % 2 == 0 ? 1.0 : 0.0;
  const Matrix S = X.col(0) + 0.2 * oracle::gaussian(rng, n, 1);
  ProtectedSdrOptions opt;
  opt.m = 2;
  opt.slices = {4};

  const ProtectedUnion eop =
      protected_sdr_union(K, y, S, FairnessCriterion::EqualityOfOpportunity, opt);
  REQUIRE(eop.W.cols() == 2);
  CHECK(eop.labels == std::vector<std::string>{"s0|y=1"});
  const ProtectedUnion eo = protected_sdr_union(K, y, S, FairnessCriterion::EqualizedOdds, opt);
  REQUIRE(eo.W.cols() == 4);
  CHECK(eo.labels == std::vector<std::string>{"s0|y=1", "s0|y=0"});
  CHECK(eo.W.leftCols(2) == eop.W);

  // Oracle: SDR on the Y=1 principal submatrix.
  Matrix Kpos(n / 2, n / 2);
  Vector spos(n / 2);
  for (Index a = 0; a < n / 2; ++a) {
    spos(a) = S(2 * a, 0);
    for (Index b = 0; b < n / 2; ++b) Kpos(a, b) = K(2 * a, 2 * b);
  }
  const SdrResult sub = sdr_subspace(Kpos, spos, 2, 4, opt.sdr);
  for (Index i = 0; i < n; ++i) {
    if (y(i) == 1.0) {
      CHECK((eop.W.row(i) - sub.W.row(i / 2)).cwiseAbs().maxCoeff() == 0.0);
      CHECK(eo.W.row(i).tail(2).cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK(eop.W.row(i).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("small labelled example: y = [1, 1, 0, 0]") {
  Matrix K(4, 4);
  K << 1.0, 0.5, 0.2, 0.1,
       0.5, 1.0, 0.3, 0.2,
       0.2, 0.3, 1.0, 0.4,
       0.1, 0.2, 0.4, 1.0;
  Vector y(4);
  y << 1, 1, 0, 0;
  Matrix S(4, 1);
  S << 0.0, 1.0, 0.0, 1.0;
  ProtectedSdrOptions opt;
  opt.m = 1;
  opt.kinds = {AttributeKind::Categorical};
  opt.sdr.eta = 0.1;
  const ProtectedUnion u = protected_sdr_union(K, y, S, FairnessCriterion::EqualizedOdds, opt);
  CHECK(u.W(2, 0) == 0.0);
  CHECK(u.W(3, 0) == 0.0);
  CHECK(u.W(0, 1) == 0.0);
  CHECK(u.W(1, 1) == 0.0);
  CHECK(u.W.col(0).norm() > 0.0);
  CHECK(u.W.col(1).norm() > 0.0);
}

TEST_CASE("union argument checks") {
  const Matrix K = Matrix::Identity(4, 4);
  const Matrix S = Matrix::Ones(4, 1);
  ProtectedSdrOptions opt;
  Vector y(4);
  y << 0, 0, 0, 0;
  CHECK_THROWS_WITH_AS(protected_sdr_union(K, y, S, FairnessCriterion::EqualityOfOpportunity, opt),
                       doctest::Contains("Y=1"), InvalidArgument);
  y << 1, 1, 1, 1;
  CHECK_THROWS_WITH_AS(protected_sdr_union(K, y, S, FairnessCriterion::EqualizedOdds, opt),
                       doctest::Contains("Y=0"), InvalidArgument);
  y << 1, 2, 0, 0;
  CHECK_THROWS_AS(protected_sdr_union(K, y, S, FairnessCriterion::EqualizedOdds, opt),
                  InvalidArgument);
  CHECK_THROWS_AS(fair_nullspace(K, Matrix::Zero(3, 1)), InvalidArgument);
}

TEST_CASE("linear construction removes covariance with the attribute") {
  for (bool dependent : {true, false}) {
    for (double rho : {0.0, 0.5}) {
      Prop1Config cfg;
      cfg.dependent = dependent;
      cfg.correlation = rho;
      cfg.seed = 3;
      const Prop1Report r = verify_prop1_synthetic(cfg);
      CHECK(r.n == 10000);
      CHECK(r.passed());
      CHECK(r.bound == doctest::Approx(3.0 * r.sigma_hat / 100.0));
    }
  }
}

TEST_CASE("covariance shrinks at the root-n rate") {
  const RateReport r = prop1_rate({250, 1000, 4000}, 32, 11);
  CHECK(r.mean_cov_norm.size() == 3);
  CHECK(r.mean_cov_norm[2] < r.mean_cov_norm[0]);
  CHECK(r.slope == doctest::Approx(-0.5).epsilon(0.4));
}
