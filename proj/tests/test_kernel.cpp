#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include <omp.h>

#include "fairgp/kernel.hpp"
#include "fairgp/parallel_kernels.hpp"
#include "fairgp/reference.hpp"
#include "oracles.hpp"

using namespace fairgp;

TEST_CASE("kernel eval closed forms") {
  const Vector x = Vector::Constant(3, 0.7);
  CHECK(eval(KernelSpec::rbf(1.0), x, x) == doctest::Approx(1.0));
  Vector a(1), b(1);
  a << 0.0;
  b << std::sqrt(2.0);
  CHECK(eval(KernelSpec::rbf(1.0), a, b) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  Vector u(2), v(2);
  u << 1, 2;
  v << 3, -1;
  CHECK(eval(KernelSpec::linear(2.0), u, v) == doctest::Approx(2.0));
  CHECK_THROWS_AS(eval(KernelSpec::rbf(1.0), u, a), InvalidArgument);
}

TEST_CASE("KernelSpec invariants") {
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::rbf(1.0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::linear(0.0), InvalidArgument);
  CHECK(kernel_family_from_string("rbf") == KernelFamily::RBF);
  CHECK_THROWS_AS(kernel_family_from_string("poly"), InvalidArgument);
}

TEST_CASE("gram small cases") {
  Matrix one(1, 2);
  one << 0.3, -0.2;
  const Matrix K1 = gram(KernelSpec::linear(), one);
  REQUIRE(K1.rows() == 1);
  CHECK(K1(0, 0) == doctest::Approx(0.13));
  Matrix twin(2, 3);
  twin << 1, 2, 3, 1, 2, 3;
  CHECK((gram(KernelSpec::rbf(0.5), twin).array() == 1.0).all());
}

TEST_CASE("gram and cross_gram match brute-force loops") {
  std::mt19937_64 rng(3);
  const Matrix X = oracle::gaussian(rng, 5, 3);
  const Matrix Z = oracle::gaussian(rng, 4, 3);
  CHECK((gram(KernelSpec::rbf(1.3, 0.7), X) - oracle::rbf_cross(X, X, 1.3, 0.7)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((cross_gram(KernelSpec::rbf(0.9), Z, X) - oracle::rbf_cross(Z, X, 0.9)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((cross_gram(KernelSpec::rbf(0.9), X, X) - gram(KernelSpec::rbf(0.9), X)).cwiseAbs().maxCoeff() == 0.0);
  const Matrix L = cross_gram(KernelSpec::linear(2.0), Z, X);
  CHECK((L - 2.0 * Z * X.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
  const Matrix single = cross_gram(KernelSpec::rbf(1.0), Z.topRows(1), X.topRows(1));
  CHECK(single(0, 0) == doctest::Approx(eval(KernelSpec::rbf(1.0), Z.row(0).transpose(), X.row(0).transpose())));
  CHECK_THROWS_AS(cross_gram(KernelSpec::rbf(1.0), Z.leftCols(2), X), InvalidArgument);
}

TEST_CASE("gram properties on random data") {
  std::mt19937_64 rng(11);
  double worst_sym = 0.0, worst_diag = 0.0, worst_eig = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Matrix X = oracle::gaussian(rng, 30, 4);
    const Matrix K = gram(KernelSpec::rbf(median_pairwise_distance(X)), X);
    worst_sym = std::max(worst_sym, (K - K.transpose()).cwiseAbs().maxCoeff());
    worst_diag = std::max(worst_diag, (K.diagonal().array() - 1.0).abs().maxCoeff());
    worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Matrix>(K).eigenvalues().minCoeff());
  }
  CHECK(worst_sym <= 1e-12);
  CHECK(worst_diag <= 1e-14);
  CHECK(worst_eig >= -1e-8);
}

TEST_CASE("center_columns") {
  CHECK(center_columns(Matrix::Ones(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  Matrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK((center_columns(Matrix::Identity(2, 2)) - expected).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(5);
  Matrix A = oracle::gaussian(rng, 6, 6);
  const Matrix K = A + A.transpose();
  const Matrix G = oracle::centering(6);
  const Matrix C = center_columns(K);
  CHECK((C - G * K).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(C.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((G * C - C).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((column_means(K) - K.colwise().mean()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("median pairwise distance") {
  std::mt19937_64 rng(8);
  const Matrix X = oracle::gaussian(rng, 21, 2);
  std::vector<double> d;
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = i + 1; j < X.rows(); ++j) d.push_back((X.row(i) - X.row(j)).norm());
  std::sort(d.begin(), d.end());
  const double median = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
  CHECK(median_pairwise_distance(X) == doctest::Approx(median).epsilon(1e-14));
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  std::mt19937_64 rng(21);
  const Matrix X = oracle::gaussian(rng, 97, 5);
  const Matrix Z = oracle::gaussian(rng, 31, 5);
  omp_set_num_threads(4);
  for (const KernelSpec& spec : {KernelSpec::rbf(1.7, 1.2), KernelSpec::linear(0.5)}) {
    const Matrix K = gram(spec, X);
    CHECK((K.array() == serial::gram(spec, X).array()).all());
    CHECK((cross_gram(spec, Z, X).array() == serial::cross_gram(spec, Z, X).array()).all());
    CHECK((center_columns(K).array() == serial::center_columns(K).array()).all());
    CHECK((column_means(K).array() == serial::column_means(K).array()).all());
  }
  CHECK(omp::pairwise_distances(X) == serial::pairwise_distances(X));
  omp_set_num_threads(omp_get_num_procs());
}
