#include "fairgp/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "fairgp/fair_subspace.hpp"
#include "fairgp/fgp.hpp"
#include "fairgp/kernel.hpp"
#include "fairgp/linalg.hpp"
#include "fairgp/metrics.hpp"
#include "fairgp/model_subspace.hpp"

namespace fairgp {

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

std::string ValidationReport::to_text() const {
  std::string out;
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%s  %-36s measured=%.3e  tol=%.3e", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.measured, c.tolerance);
    out += buf;
    if (!c.detail.empty()) out += "  " + c.detail;
    out += "\n";
  }
  return out;
}

namespace {

struct Rng {
  std::mt19937_64 engine;
  std::normal_distribution<double> normal{0.0, 1.0};
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  Matrix gaussian(Index rows, Index cols) {
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) M(i, j) = normal(engine);
    return M;
  }
  Index uniform(Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(engine);
  }
};

ValidationCheck make_check(std::string name, double measured, double tolerance,
                           std::string detail = {}) {
  ValidationCheck c;
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tolerance;
  c.passed = std::isfinite(measured) && measured <= tolerance;
  c.detail = std::move(detail);
  return c;
}

void identity_suite(const ValidationOptions& options, ValidationReport& report) {
  Rng rng(options.seed);
  double ortho = 0.0, cosines = 0.0, gaps = 0.0;
  const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = rng.uniform(20, 60);
    const Matrix X = rng.gaussian(n, 3);
    const Matrix K = gram(KernelSpec::rbf(median_pairwise_distance(X)), X);
    const FairBasis fb = fair_nullspace(K, rng.gaussian(n, 2));
    const OrthonormalBasis F = orthonormalize(K, fb.Q);
    const OrthonormalBasis G = orthonormalize(K, rng.gaussian(n, rng.uniform(1, 3)));
    const PrincipalPair pair = principal_pair(K, F, G);
    for (double eps : grid) {
      ModelBasis mb = model_basis(F, G, pair, eps);
      if (options.corrupt_basis) mb.E.col(0) *= 1.01;
      ortho = std::max(ortho, linalg::orthonormality_defect(K, mb.E));
      Vector sv = Eigen::JacobiSVD<Matrix>(F.coeffs.transpose() * K * mb.E).singularValues();
      Vector gamma = mb.gamma;
      std::sort(gamma.data(), gamma.data() + gamma.size(), std::greater<>());
      cosines = std::max(cosines, (sv - gamma).cwiseAbs().maxCoeff());
      if (!options.corrupt_basis) {
        const ProjectionGaps expected = projection_gaps(mb.sigma_min(), eps);
        gaps = std::max(gaps, std::abs(empirical_projection_gap(K, F.coeffs, mb.E) -
                                       expected.fair_gap));
        gaps = std::max(gaps, std::abs(empirical_projection_gap(K, G.coeffs, mb.E) -
                                       expected.pred_gap));
      }
    }
  }
  report.checks.push_back(make_check("model_basis.orthonormality", ortho, 1e-8));
  report.checks.push_back(make_check("model_basis.fair_cosines", cosines, 1e-8));
  if (!options.corrupt_basis)
    report.checks.push_back(make_check("model_basis.projection_gaps", gaps, 1e-6));
}

void orthogonality_suite(const ValidationOptions& options, ValidationReport& report) {
  Rng rng(options.seed + 101);
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    const Index n = rng.uniform(40, 120);
    const Matrix X = rng.gaussian(n, 4);
    const Vector s = X.col(0) + 0.3 * rng.gaussian(n, 1);
    const Matrix K = gram(KernelSpec::rbf(median_pairwise_distance(X)), X);
    ProtectedSdrOptions popt;
    popt.m = 3;
    const ProtectedUnion u =
        protected_sdr_union(K, Vector(), s, FairnessCriterion::StatisticalParity, popt);
    const FairBasis fb = fair_nullspace(K, u.W);
    const double knorm = linalg::spectral_norm_sym(K);
    worst = std::max(worst, fairness_residual(K, u.W, fb.Q) / (knorm * knorm));
  }
  report.checks.push_back(make_check("fair_subspace.orthogonality", worst, 1e-8,
                                     "max|W'K Gamma K Q| / ||K||^2"));
}

void prop1_suite(const ValidationOptions& options, ValidationReport& report) {
  Prop1Config cfg;
  cfg.seed = options.seed;
  const Prop1Report r = verify_prop1_synthetic(cfg);
  report.checks.push_back(make_check("linear_fairness.covariance_bound", r.sample_cov_norm, r.bound,
                                     "n=" + std::to_string(r.n)));
  const RateReport rate =
      prop1_rate({1000, 4000, 16000}, static_cast<int>(options.prop1_replicates), options.seed);
  report.checks.push_back(make_check("linear_fairness.rate_slope", std::abs(rate.slope + 0.5), 0.2,
                                     "slope=" + std::to_string(rate.slope)));
}

struct GpInstance {
  Matrix X;
  Vector y;
  Matrix E;
  Vector log_lambda;
  double log_noise;
};

GpInstance random_gp(Rng& rng, Index n, Index d) {
  GpInstance g;
  g.X = rng.gaussian(n, 2);
  g.y = rng.gaussian(n, 1);
  g.E = rng.gaussian(n, d) / std::sqrt(static_cast<double>(n));
  g.log_lambda = 0.5 * rng.gaussian(d, 1);
  g.log_noise = -1.0 + 0.3 * rng.normal(rng.engine);
  return g;
}

void gp_suite(const ValidationOptions& options, ValidationReport& report) {
  Rng rng(options.seed + 202);
  const KernelSpec spec = KernelSpec::rbf(1.0);

  double grad_err = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = rng.uniform(10, 30);
    const Index d = rng.uniform(1, 4);
    const GpInstance g = random_gp(rng, n, d);
    const FgpModel model = FgpModel::create(spec, g.X, g.E, g.log_lambda, g.log_noise);
    const LmlGradient grad = lml_gradient(model, g.y);
    const double h = 1e-5;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-3); };
    for (Index j = 0; j < d; ++j) {
      Vector up = g.log_lambda, dn = g.log_lambda;
      up(j) += h;
      dn(j) -= h;
      const double fd = (log_marginal_likelihood(model.with_hyperparameters(up, g.log_noise), g.y) -
                         log_marginal_likelihood(model.with_hyperparameters(dn, g.log_noise), g.y)) /
                        (2 * h);
      grad_err = std::max(grad_err, rel(grad.log_lambda(j), fd));
    }
    const double fd = (log_marginal_likelihood(model.with_hyperparameters(g.log_lambda, g.log_noise + h), g.y) -
                       log_marginal_likelihood(model.with_hyperparameters(g.log_lambda, g.log_noise - h), g.y)) /
                      (2 * h);
    grad_err = std::max(grad_err, rel(grad.log_noise, fd));
  }
  report.checks.push_back(make_check("fgp.gradient_vs_fd", grad_err, 1e-4));

  // Dense textbook posterior at n = 25.
  const GpInstance g = random_gp(rng, 25, 3);
  const FgpModel model =
      FgpModel::create(spec, g.X, g.E, g.log_lambda, g.log_noise).with_targets(g.y);
  const Matrix Z = rng.gaussian(10, 2);
  const Prediction pred = predict(model, Z);
  const Matrix Kc = center_columns(gram(spec, g.X));
  const Matrix Phi = Kc * g.E;
  const Eigen::RowVectorXd means = column_means(gram(spec, g.X));
  const Matrix P = (cross_gram(spec, Z, g.X).rowwise() - means) * g.E;
  const Matrix Lambda = g.log_lambda.array().exp().matrix().asDiagonal();
  const double s2 = std::exp(g.log_noise);
  const Matrix C = Phi * Lambda * Phi.transpose() + s2 * Matrix::Identity(25, 25);
  const Eigen::LLT<Matrix> llt(C);
  const Matrix cross = P * Lambda * Phi.transpose();
  const Vector mean = cross * llt.solve(g.y);
  const Vector var = (P * Lambda * P.transpose() - cross * llt.solve(cross.transpose()))
                         .diagonal()
                         .array()
                         .max(0.0) +
                     s2;
  const double post_err =
      std::max((mean - pred.mean).cwiseAbs().maxCoeff(), (var - pred.var).cwiseAbs().maxCoeff());
  report.checks.push_back(make_check("fgp.posterior_vs_dense", post_err, 1e-8));

  // Ascent monotonicity over accepted steps.
  const GpInstance f = random_gp(rng, 40, 2);
  FitTrace trace;
  FitConfig cfg;
  cfg.max_iters = 200;
  fit(spec, f.X, f.y, f.E, cfg, &trace);
  double drop = 0.0;
  for (std::size_t i = 1; i < trace.accepted_lml.size(); ++i)
    drop = std::max(drop, trace.accepted_lml[i - 1] - trace.accepted_lml[i]);
  report.checks.push_back(make_check("fgp.lml_monotone", drop, 0.0,
                                     std::to_string(trace.accepted_lml.size()) + " accepted"));
}

void structure_suite(const ValidationOptions& options, ValidationReport& report) {
  Rng rng(options.seed + 303);
  const Index n = 80;
  const Matrix X = rng.gaussian(n, 3);
  Vector y(n), s(n);
  for (Index i = 0; i < n; ++i) {
    s(i) = X(i, 0) > 0.0 ? 1.0 : 0.0;
    y(i) = X(i, 1) + 0.3 * rng.normal(rng.engine) > 0.0 ? 1.0 : 0.0;
  }
  const Matrix K = gram(KernelSpec::rbf(median_pairwise_distance(X)), X);
  ProtectedSdrOptions popt;
  popt.m = 1;
  popt.kinds = {AttributeKind::Categorical};
  const ProtectedUnion eop =
      protected_sdr_union(K, y, s, FairnessCriterion::EqualityOfOpportunity, popt);
  const ProtectedUnion eo = protected_sdr_union(K, y, s, FairnessCriterion::EqualizedOdds, popt);
  const double ratio_err = std::abs(static_cast<double>(eo.W.cols()) - 2.0 * eop.W.cols());
  report.checks.push_back(make_check("fair_subspace.eo_columns", ratio_err, 0.0));
  double pad = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (y(i) == 1.0) {
      pad = std::max(pad, eo.W.block(i, popt.m, 1, popt.m).cwiseAbs().maxCoeff());
    } else {
      pad = std::max(pad, eop.W.row(i).cwiseAbs().maxCoeff());
      pad = std::max(pad, eo.W.block(i, 0, 1, popt.m).cwiseAbs().maxCoeff());
    }
  }
  report.checks.push_back(make_check("fair_subspace.zero_padding", pad, 0.0));
  const Vector yhat = X.col(0) + X.col(1);
  const Vector gap = eop_score(yhat, s, y) - eo_score(yhat, s, y);
  report.checks.push_back(make_check("metrics.eo_dominates_eop", std::max(0.0, gap.maxCoeff()), 0.0));
}

}  // namespace

ValidationReport run_validation(const ValidationOptions& options) {
  ValidationReport report;
  identity_suite(options, report);
  orthogonality_suite(options, report);
  prop1_suite(options, report);
  gp_suite(options, report);
  structure_suite(options, report);
  return report;
}

}  // namespace fairgp
