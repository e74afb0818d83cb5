#include <doctest.h>

#include <cmath>
#include <random>

#include "fairgp/fgp.hpp"
#include "fairgp/kernel.hpp"
#include "fairgp/model_subspace.hpp"
#include "fairgp/serialize.hpp"
#include "oracles.hpp"

using namespace fairgp;

namespace {

struct Setup {
  KernelSpec spec = KernelSpec::linear();
  Matrix X;
  Matrix K;
  Matrix E;
};

Setup make_setup(std::mt19937_64& rng, Index n, Index d) {
  Setup s;
  s.X = oracle::gaussian(rng, n, 3);
  s.spec = KernelSpec::rbf(median_pairwise_distance(s.X), 1.3);
  s.K = gram(s.spec, s.X);
  s.E = orthonormalize(s.K, oracle::gaussian(rng, n, d)).coeffs;
  return s;
}

Matrix oracle_features(const Setup& s, const Matrix& Z) {
  const Matrix Kz = oracle::rbf_cross(Z, s.X, s.spec.lengthscale(), s.spec.variance());
  const Eigen::RowVectorXd means = s.K.colwise().mean();
  return (Kz.rowwise() - means) * s.E;
}

Matrix dense_cov(const Matrix& Phi, const Vector& lambda, double s2) {
  return Phi * lambda.asDiagonal() * Phi.transpose() +
         s2 * Matrix::Identity(Phi.rows(), Phi.rows());
}

}  // namespace

TEST_CASE("features match the direct expression") {
  std::mt19937_64 rng(1);
  const Setup s = make_setup(rng, 30, 4);
  const FgpModel m = FgpModel::create(s.spec, s.X, s.E, Vector::Zero(4), 0.0);
  const Matrix Z = oracle::gaussian(rng, 7, 3);
  CHECK((features(m, Z) - oracle_features(s, Z)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((m.train_features() - oracle::centering(30) * s.K * s.E).cwiseAbs().maxCoeff() <= 1e-12);
  const FgpModel zero = FgpModel::create(s.spec, s.X, Matrix::Zero(30, 2), Vector::Zero(2), 0.0);
  CHECK(features(zero, Z).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(features(m, Matrix::Zero(2, 2)), InvalidArgument);
}

TEST_CASE("features for a hand-sized example") {
  Matrix X(2, 1);
  X << 0.0, 1.0;
  Matrix Z(1, 1);
  Z << 0.5;
  Matrix E(2, 1);
  E << 1.0, -2.0;
  const FgpModel m = FgpModel::create(KernelSpec::rbf(1.0), X, E, Vector::Zero(1), 0.0);
  const double mean = 0.5 * (1.0 + std::exp(-0.5));
  const double row = std::exp(-0.125) - mean;
  CHECK(features(m, Z)(0, 0) == doctest::Approx(row * 1.0 + row * -2.0).epsilon(1e-14));
}

TEST_CASE("evidence examples") {
  Matrix X(1, 1);
  X << 0.3;
  const FgpModel one = FgpModel::create(KernelSpec::rbf(1.0), X, Matrix::Ones(1, 1), Vector::Zero(1), 0.0);
  CHECK(log_marginal_likelihood(one, Vector::Zero(1)) == doctest::Approx(-0.918938533204673).epsilon(1e-12));

  std::mt19937_64 rng(2);
  const Setup s = make_setup(rng, 20, 3);
  const Vector y = oracle::gaussian(rng, 20, 1);
  const double s2 = 0.3;
  const FgpModel flat = FgpModel::create(s.spec, s.X, s.E, Vector::Constant(3, -30.0), std::log(s2));
  const double iid = -0.5 * y.squaredNorm() / s2 - 10.0 * std::log(2.0 * M_PI * s2);
  CHECK(log_marginal_likelihood(flat, y) == doctest::Approx(iid).epsilon(1e-9));
}

TEST_CASE("evidence matches the dense formula") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const Setup s = make_setup(rng, 20, 1 + t % 5);
    const Index d = s.E.cols();
    const Vector ll = oracle::gaussian(rng, d, 1);
    const double ln = -1.0 + 0.2 * t;
    const Vector y = oracle::gaussian(rng, 20, 1);
    const FgpModel m = FgpModel::create(s.spec, s.X, s.E, ll, ln);
    const Matrix C = dense_cov(m.train_features(), ll.array().exp(), std::exp(ln));
    CHECK(log_marginal_likelihood(m, y) == doctest::Approx(oracle::dense_lml(C, y)).epsilon(1e-10));
    const auto& post = m.posterior();
    CHECK(post.log_det == doctest::Approx(std::log(C.determinant())).epsilon(1e-10));
    CHECK(post.trace_inverse == doctest::Approx(C.inverse().trace()).epsilon(1e-10));
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(4);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const Setup s = make_setup(rng, 15, 3);
    const Vector ll = oracle::gaussian(rng, 3, 1);
    const double ln = -2.0 + 0.1 * t;
    const Vector y = oracle::gaussian(rng, 15, 1);
    const FgpModel m = FgpModel::create(s.spec, s.X, s.E, ll, ln);
    const LmlGradient g = lml_gradient(m, y);
    auto lml = [&](const Vector& a, double b) {
      return log_marginal_likelihood(m.with_hyperparameters(a, b), y);
    };
    for (Index j = 0; j < 3; ++j) {
      Vector up = ll, dn = ll;
      up(j) += h;
      dn(j) -= h;
      const double fd = (lml(up, ln) - lml(dn, ln)) / (2.0 * h);
      CHECK(std::abs(g.log_lambda(j) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
    const double fd = (lml(ll, ln + h) - lml(ll, ln - h)) / (2.0 * h);
    CHECK(std::abs(g.log_noise - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
  Matrix X = Matrix::Random(6, 2);
  const FgpModel zero = FgpModel::create(KernelSpec::linear(), X, Matrix::Zero(6, 2), Vector::Zero(2), 0.0);
  CHECK(lml_gradient(zero, Vector::Ones(6)).log_lambda.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posterior matches the dense textbook formulas") {
  std::mt19937_64 rng(5);
  const Setup s = make_setup(rng, 25, 4);
  const Vector ll = oracle::gaussian(rng, 4, 1);
  const double s2 = 0.2;
  const Vector y = oracle::gaussian(rng, 25, 1);
  const FgpModel m = FgpModel::create(s.spec, s.X, s.E, ll, std::log(s2)).with_targets(y);
  const Matrix Z = oracle::gaussian(rng, 9, 3);
  const Prediction p = predict(m, Z);

  const Vector lambda = ll.array().exp();
  const Matrix Phi = oracle_features(s, s.X);
  const Matrix Pz = oracle_features(s, Z);
  const Matrix C = dense_cov(Phi, lambda, s2);
  const Matrix Kzx = Pz * lambda.asDiagonal() * Phi.transpose();
  const Vector mean = Kzx * C.ldlt().solve(y);
  const Matrix cov = Pz * lambda.asDiagonal() * Pz.transpose() - Kzx * C.ldlt().solve(Kzx.transpose());
  CHECK((p.mean - mean).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((p.var - (cov.diagonal().array() + s2).matrix()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(p.clipped == 0);
}

TEST_CASE("posterior limits") {
  std::mt19937_64 rng(6);
  const Index n = 8;
  const Matrix X = oracle::gaussian(rng, n, 2);
  const KernelSpec spec = KernelSpec::rbf(1.0);
  Vector y = oracle::gaussian(rng, n, 1);
  y.array() -= y.mean();

  // Centered features span the mean-zero vectors, so tiny noise interpolates.
  const FgpModel sharp =
      FgpModel::create(spec, X, Matrix::Identity(n, n), Vector::Zero(n), std::log(1e-10)).with_targets(y);
  CHECK((predict(sharp, X).mean - y).cwiseAbs().maxCoeff() <= 1e-4);

  const FgpModel flat =
      FgpModel::create(spec, X, Matrix::Identity(n, n), Vector::Constant(n, -40.0), std::log(0.5)).with_targets(y);
  const Prediction p = predict(flat, oracle::gaussian(rng, 5, 2));
  CHECK(p.mean.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((p.var.array() - 0.5).abs().maxCoeff() <= 1e-12);

  const FgpModel bare = FgpModel::create(spec, X, Matrix::Identity(n, n), Vector::Zero(n), 0.0);
  CHECK_THROWS_AS(predict(bare, X), InvalidArgument);
}

TEST_CASE("posterior mean lies in the feature span") {
  std::mt19937_64 rng(7);
  const Setup s = make_setup(rng, 40, 3);
  const Vector y = oracle::gaussian(rng, 40, 1);
  const FgpModel m = fit(s.spec, s.X, y, s.E);
  const Matrix Z = oracle::gaussian(rng, 60, 3);
  Matrix stacked(60, 5);
  stacked << features(m, Z), predict(m, Z).mean.array() - m.y_offset(), Vector::Ones(60);
  const Vector sv = Eigen::JacobiSVD<Matrix>(stacked.leftCols(4)).singularValues();
  CHECK(sv(3) <= 1e-10 * sv(0));
  const Prediction p = predict(m, Z);
  CHECK(p.clipped <= 0);
  CHECK((p.var.array() > 0.0).all());
}

TEST_CASE("fit ascends and reaches a stationary point") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    const Setup s = make_setup(rng, 60, 3);
    const Vector y = s.K * oracle::gaussian(rng, 60, 1) * 0.05 + 0.3 * oracle::gaussian(rng, 60, 1);
    FitTrace trace;
    FitConfig cfg;
    const FgpModel m = fit(s.spec, s.X, y, s.E, cfg, &trace);
    REQUIRE(trace.accepted_lml.size() >= 2);
    for (std::size_t k = 1; k < trace.accepted_lml.size(); ++k)
      CHECK(trace.accepted_lml[k] >= trace.accepted_lml[k - 1]);
    CHECK(trace.accepted_lml.back() >= trace.accepted_lml.front());
    CHECK(trace.converged);
    CHECK(log_marginal_likelihood(m, m.targets()) == doctest::Approx(trace.accepted_lml.back()));
    LmlGradient g = lml_gradient(m, m.targets());
    for (Index j = 0; j < 3; ++j)
      if (m.log_lambda()(j) <= cfg.min_log_lambda || m.log_lambda()(j) >= cfg.max_log_lambda)
        g.log_lambda(j) = 0.0;
    CHECK(g.log_lambda.cwiseAbs().maxCoeff() <= 1e-4);
    CHECK(std::abs(g.log_noise) <= 1e-4);
    CHECK(m.y_offset() == doctest::Approx(y.mean()));
  }
}

TEST_CASE("fit on a null signal drives the noise to its floor") {
  std::mt19937_64 rng(9);
  const Setup s = make_setup(rng, 30, 2);
  FitTrace trace;
  const FgpModel m = fit(s.spec, s.X, Vector::Zero(30), s.E, {}, &trace);
  CHECK(m.noise_variance() <= 1e-6);
  CHECK(trace.accepted_lml.back() > trace.accepted_lml.front());
}

TEST_CASE("fit matches the generating hyperparameters") {
  std::mt19937_64 rng(10);
  const Setup s = make_setup(rng, 300, 3);
  Vector ll(3);
  ll << 1.0, -0.5, 0.3;
  const double ln = std::log(0.1);
  const FgpModel truth = FgpModel::create(s.spec, s.X, s.E, ll, ln);
  const Vector y = sample_prior(truth, s.X, 99) + std::sqrt(0.1) * oracle::gaussian(rng, 300, 1);
  FitConfig cfg;
  cfg.center_targets = false;
  FitTrace trace;
  const FgpModel m = fit(s.spec, s.X, y, s.E, cfg, &trace);
  CHECK(trace.accepted_lml.back() >= log_marginal_likelihood(truth, y) - 1e-3);
}

TEST_CASE("linear mean in feature space") {
  std::mt19937_64 rng(11);
  const Setup s = make_setup(rng, 50, 2);
  const Vector y = oracle::gaussian(rng, 50, 1);
  FitConfig cfg;
  cfg.mean = MeanFunction::LinearPi;
  const FgpModel m = fit(s.spec, s.X, y, s.E, cfg);
  REQUIRE(m.mean_beta().size() == 2);
  // beta is the generalized least squares solution under C.
  const Matrix Phi = m.train_features();
  const Matrix C = dense_cov(Phi, m.lambda(), m.noise_variance());
  const Matrix CiPhi = C.ldlt().solve(Phi);
  const Vector beta = (Phi.transpose() * CiPhi).ldlt().solve(CiPhi.transpose() * m.targets().eval());
  CHECK((m.mean_beta() - beta).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, beta.cwiseAbs().maxCoeff()));
}

TEST_CASE("prior samples") {
  std::mt19937_64 rng(12);
  const Setup s = make_setup(rng, 30, 3);
  Vector ll(3);
  ll << 0.5, -0.2, 0.1;
  const FgpModel m = FgpModel::create(s.spec, s.X, s.E, ll, 0.0);
  CHECK(sample_prior(m, s.X, 5) == sample_prior(m, s.X, 5));
  CHECK(sample_prior(m, s.X, 5) != sample_prior(m, s.X, 6));

  const Vector f = sample_prior(m, s.X, 7);
  const Matrix& Phi = m.train_features();
  const Vector coef = Phi.colPivHouseholderQr().solve(f);
  CHECK((Phi * coef - f).cwiseAbs().maxCoeff() <= 1e-10);

  const Matrix Z = oracle::gaussian(rng, 3, 3);
  const Matrix draws = sample_prior(m, Z, 13, 10000);
  const Matrix centered = draws.colwise() - draws.rowwise().mean();
  const Matrix emp = centered * centered.transpose() / 9999.0;
  const Matrix P = features(m, Z);
  const Matrix cov = P * m.lambda().asDiagonal() * P.transpose();
  CHECK((emp - cov).norm() <= 0.05 * cov.norm());
}

TEST_CASE("model serialization round-trips exactly") {
  std::mt19937_64 rng(13);
  const Setup s = make_setup(rng, 30, 3);
  const Vector y = oracle::gaussian(rng, 30, 1);
  FitConfig cfg;
  cfg.mean = MeanFunction::LinearPi;
  const FgpModel m = fit(s.spec, s.X, y, s.E, cfg);
  const FgpModel back = model_from_json(Json::parse(model_to_json(m).dump()));
  const Matrix Z = oracle::gaussian(rng, 10, 3);
  const Prediction a = predict(m, Z), b = predict(back, Z);
  CHECK((a.mean.array() == b.mean.array()).all());
  CHECK((a.var.array() == b.var.array()).all());
  CHECK(back.spec() == m.spec());

  Json broken = model_to_json(m);
  broken["format"] = "other";
  CHECK_THROWS(model_from_json(broken));
}
