#include "fairgp/fgp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fairgp/kernel.hpp"
#include "fairgp/linalg.hpp"

namespace fairgp {

namespace {

using Posterior = FgpModel::Posterior;

Posterior make_posterior(const Matrix& gram, const Vector& lambda, double noise, Index n) {
  Posterior post;
  post.gram = gram;
  post.lambda = lambda;
  post.noise = noise;
  post.n = n;
  const Index d = lambda.size();
  const Vector D = lambda.cwiseSqrt();
  const Matrix DGD = D.asDiagonal() * gram * D.asDiagonal();
  Matrix inner = Matrix::Identity(d, d) + DGD / noise;
  post.inner.compute(inner);
  if (post.inner.info() != Eigen::Success)
    throw NumericalError("fgp: covariance is not positive definite");
  const Matrix L = post.inner.matrixL();
  post.log_det = static_cast<double>(n) * std::log(noise) +
                 2.0 * L.diagonal().array().log().sum();
  const Matrix DG = D.asDiagonal() * gram;
  post.feature_precision = (gram - DG.transpose() * post.inner.solve(DG) / noise) / noise;
  post.trace_inverse = (static_cast<double>(n) - post.inner.solve(DGD).trace() / noise) / noise;
  if (!std::isfinite(post.log_det) || !std::isfinite(post.trace_inverse))
    throw NumericalError("fgp: non-finite covariance factorization");
  return post;
}

struct Evidence {
  double lml = 0.0;
  Vector alpha;        // C^{-1} y
  Vector phi_alpha;    // Phi^T alpha
};

Evidence evidence(const Matrix& Phi, const Posterior& post, const Vector& y) {
  const Vector D = post.lambda.cwiseSqrt();
  const Vector b = Phi.transpose() * y;
  const Vector c = D.asDiagonal() * post.inner.solve(D.asDiagonal() * b) / post.noise;
  Evidence ev;
  ev.alpha = (y - Phi * c) / post.noise;
  ev.phi_alpha = Phi.transpose() * ev.alpha;
  const double quad = y.dot(ev.alpha);
  ev.lml = -0.5 * quad - 0.5 * post.log_det -
           0.5 * static_cast<double>(post.n) * std::log(2.0 * std::numbers::pi);
  return ev;
}

LmlGradient gradient_from(const Posterior& post, const Evidence& ev) {
  LmlGradient g;
  g.log_lambda = 0.5 * post.lambda.array() *
                 (ev.phi_alpha.array().square() - post.feature_precision.diagonal().array());
  g.log_noise = 0.5 * post.noise * (ev.alpha.squaredNorm() - post.trace_inverse);
  return g;
}

// Generalized least squares weights for the optional Pi-space mean.
Vector gls_beta(const Matrix& Phi, const Posterior& post, const Vector& y) {
  const Evidence ev = evidence(Phi, post, y);
  return post.feature_precision.ldlt().solve(ev.phi_alpha);
}

double variance_of(const Vector& y) {
  if (y.size() < 2) return 0.0;
  return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
}

}  // namespace

FgpModel FgpModel::create(const KernelSpec& spec, const Matrix& Xtrain, const Matrix& E,
                          const Vector& log_lambda, double log_noise) {
  require(Xtrain.rows() >= 1, "fgp: empty training set");
  require(E.rows() == Xtrain.rows(), "fgp: E rows must match the training set size");
  require(log_lambda.size() == E.cols(), "fgp: log_lambda length must equal dim(E)");
  require(log_lambda.allFinite() && std::isfinite(log_noise), "fgp: non-finite hyperparameters");
  FgpModel model;
  model.spec_ = spec;
  model.Xtrain_ = Xtrain;
  const Matrix K = gram(spec, Xtrain);
  model.col_means_ = column_means(K);
  model.E_ = E;
  model.log_lambda_ = log_lambda;
  model.log_noise_ = log_noise;
  model.Phi_ = center_columns(K) * E;
  model.refresh_posterior();
  return model;
}

FgpModel FgpModel::restore(const KernelSpec& spec, const Matrix& Xtrain,
                           const Eigen::RowVectorXd& col_means, const Matrix& E,
                           const Vector& log_lambda, double log_noise, const Vector* y,
                           double y_offset, const Vector& mean_beta) {
  FgpModel model = create(spec, Xtrain, E, log_lambda, log_noise);
  require(col_means.size() == model.col_means_.size() &&
              (col_means - model.col_means_).cwiseAbs().maxCoeff() <=
                  1e-12 * (1.0 + model.col_means_.cwiseAbs().maxCoeff()),
          "fgp: stored column means do not match the training data");
  model.col_means_ = col_means;
  model.Phi_ = (gram(spec, Xtrain).rowwise() - col_means) * E;
  model.refresh_posterior();
  if (y != nullptr) return model.with_targets(*y, y_offset, mean_beta);
  return model;
}

void FgpModel::refresh_posterior() {
  posterior_ = std::make_shared<const Posterior>(
      make_posterior(Phi_.transpose() * Phi_, lambda(), noise_variance(), Phi_.rows()));
}

double FgpModel::noise_variance() const { return std::exp(log_noise_); }

Vector FgpModel::lambda() const { return log_lambda_.array().exp(); }

FgpModel FgpModel::with_targets(const Vector& y, double y_offset, const Vector& mean_beta) const {
  require(y.size() == Phi_.rows(), "fgp: target length does not match the training set");
  require(mean_beta.size() == 0 || mean_beta.size() == dim(), "fgp: mean weights have wrong size");
  FgpModel out = *this;
  out.has_targets_ = true;
  out.y_ = y;
  out.y_offset_ = y_offset;
  out.beta_ = mean_beta;
  Vector residual = y;
  if (mean_beta.size() > 0) residual -= Phi_ * mean_beta;
  out.alpha_proj_ = evidence(Phi_, *posterior_, residual).phi_alpha;
  return out;
}

FgpModel FgpModel::with_hyperparameters(const Vector& log_lambda, double log_noise) const {
  require(log_lambda.size() == dim(), "fgp: log_lambda length must equal dim(E)");
  require(log_lambda.allFinite() && std::isfinite(log_noise), "fgp: non-finite hyperparameters");
  FgpModel out = *this;
  out.log_lambda_ = log_lambda;
  out.log_noise_ = log_noise;
  out.has_targets_ = false;
  out.y_.resize(0);
  out.beta_.resize(0);
  out.alpha_proj_.resize(0);
  out.refresh_posterior();
  return out;
}

Matrix features(const FgpModel& model, const Matrix& Z) {
  require(Z.cols() == model.Xtrain().cols(),
          "fgp features: feature dimension mismatch (" + std::to_string(Z.cols()) + " vs " +
              std::to_string(model.Xtrain().cols()) + ")");
  return (cross_gram(model.spec(), Z, model.Xtrain()).rowwise() - model.train_col_means()) *
         model.E();
}

double log_marginal_likelihood(const FgpModel& model, const Vector& y) {
  require(y.size() == model.train_features().rows(), "fgp: target length mismatch");
  return evidence(model.train_features(), model.posterior(), y).lml;
}

LmlGradient lml_gradient(const FgpModel& model, const Vector& y) {
  require(y.size() == model.train_features().rows(), "fgp: target length mismatch");
  const Evidence ev = evidence(model.train_features(), model.posterior(), y);
  return gradient_from(model.posterior(), ev);
}

FgpModel fit(const KernelSpec& spec, const Matrix& Xtrain, const Vector& y, const Matrix& E,
             const FitConfig& config, FitTrace* trace) {
  const Index n = Xtrain.rows();
  require(n >= 2, "fgp fit: need at least two training points");
  require(y.size() == n, "fgp fit: target length mismatch");
  require(config.max_iters >= 1, "fgp fit: max_iters must be >= 1");
  require(config.convergence_tol > 0.0, "fgp fit: convergence_tol must be positive");
  const Index d = E.cols();

  const double offset = config.center_targets ? y.mean() : 0.0;
  const Vector yc = y.array() - offset;
  const double var_y = variance_of(y);
  const double var_ref = var_y > 0.0 ? var_y : 1.0;
  const double min_log_noise = std::log(config.noise_floor_ratio * var_ref);

  const double init_noise =
      config.init_log_noise_set ? config.init_log_noise : std::log(0.1 * var_ref);
  FgpModel base = FgpModel::create(spec, Xtrain, E, Vector::Constant(d, config.init_log_lambda),
                                   std::max(init_noise, min_log_noise));
  const Matrix& Phi = base.train_features();
  const Matrix gram_phi = Phi.transpose() * Phi;

  struct Point {
    Vector theta;
    double lml = 0.0;
    Vector grad;
    Vector beta;
  };
  int evaluations = 0;
  auto evaluate = [&](const Vector& theta) {
    Point p;
    p.theta = theta;
    const Posterior post =
        make_posterior(gram_phi, theta.head(d).array().exp(), std::exp(theta(d)), n);
    Vector target = yc;
    if (config.mean == MeanFunction::LinearPi && d > 0) {
      p.beta = gls_beta(Phi, post, yc);
      target -= Phi * p.beta;
    }
    const Evidence ev = evidence(Phi, post, target);
    const LmlGradient g = gradient_from(post, ev);
    p.lml = ev.lml;
    p.grad.resize(d + 1);
    p.grad.head(d) = g.log_lambda;
    p.grad(d) = g.log_noise;
    ++evaluations;
    return p;
  };
  auto project = [&](Vector theta) {
    for (Index j = 0; j < d; ++j)
      theta(j) = std::clamp(theta(j), config.min_log_lambda, config.max_log_lambda);
    theta(d) = std::max(theta(d), min_log_noise);
    return theta;
  };

  Vector theta0(d + 1);
  theta0.head(d) = base.log_lambda();
  theta0(d) = base.log_noise();
  Point current = evaluate(project(theta0));
  if (!std::isfinite(current.lml))
    throw NumericalError("fgp fit: non-finite log marginal likelihood at initialization");

  FitTrace local;
  local.accepted_lml.push_back(current.lml);
  // Projected BFGS on -LML; H approximates the inverse Hessian.
  const Index k = d + 1;
  auto pinned = [&](const Point& p, Index j) {
    if (j < d)
      return (p.theta(j) <= config.min_log_lambda && p.grad(j) < 0.0) ||
             (p.theta(j) >= config.max_log_lambda && p.grad(j) > 0.0);
    return p.theta(j) <= min_log_noise && p.grad(j) < 0.0;
  };
  Matrix H = config.initial_step * Matrix::Identity(k, k);
  bool fresh = true;
  int it = 0;
  for (; it < config.max_iters; ++it) {
    Vector g = current.grad;
    for (Index j = 0; j < k; ++j)
      if (pinned(current, j)) g(j) = 0.0;
    if (g.cwiseAbs().maxCoeff() <= config.gradient_tol) {
      local.converged = true;
      break;
    }
    Vector dir = H * g;
    for (Index j = 0; j < k; ++j)
      if (g(j) == 0.0 && pinned(current, j)) dir(j) = 0.0;
    if (g.dot(dir) <= 0.0) {
      H = config.initial_step * Matrix::Identity(k, k);
      dir = H * g;
      fresh = true;
    }
    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt < config.max_backtracks; ++bt, t *= 0.5) {
      const Vector candidate = project(current.theta + t * dir);
      const double ascent = current.grad.dot(candidate - current.theta);
      Point next = evaluate(candidate);
      if (ascent > 0.0 && std::isfinite(next.lml) &&
          next.lml >= current.lml + config.armijo * ascent && next.lml >= current.lml) {
        const Vector step = next.theta - current.theta;
        const Vector change = current.grad - next.grad;  // gradient change of -LML
        const double curvature = step.dot(change);
        if (curvature > 1e-12 * step.norm() * change.norm()) {
          if (fresh) H = (curvature / change.squaredNorm()) * Matrix::Identity(k, k);
          const double rho = 1.0 / curvature;
          const Matrix V = Matrix::Identity(k, k) - rho * change * step.transpose();
          H = V.transpose() * H * V + rho * step * step.transpose();
          fresh = false;
        }
        const double gain = next.lml - current.lml;
        current = std::move(next);
        local.accepted_lml.push_back(current.lml);
        accepted = true;
        if (gain <= config.convergence_tol * (1.0 + std::abs(current.lml)) &&
            current.grad.cwiseAbs().maxCoeff() <= std::sqrt(config.gradient_tol)) {
          local.converged = true;
          ++it;
        }
        break;
      }
    }
    if (!accepted) {
      if (!fresh) {
        H = config.initial_step * Matrix::Identity(k, k);
        fresh = true;
        continue;
      }
      local.converged = true;  // no ascent possible at machine precision
      break;
    }
    if (local.converged) break;
  }
  local.iterations = it;
  local.evaluations = evaluations;
  if (trace != nullptr) *trace = local;

  FgpModel fitted = base.with_hyperparameters(current.theta.head(d), current.theta(d));
  return fitted.with_targets(yc, offset, current.beta);
}

Prediction predict(const FgpModel& model, const Matrix& Z) {
  if (!model.fitted()) throw InvalidArgument("fgp predict: model has no training targets");
  const Matrix P = features(model, Z);
  const Posterior& post = model.posterior();
  const Matrix PL = P * post.lambda.asDiagonal();
  Prediction out;
  out.mean = PL * model.alpha_features();
  if (model.mean_beta().size() > 0) out.mean += P * model.mean_beta();
  out.mean.array() += model.y_offset();
  const Vector prior_var = (PL.array() * P.array()).rowwise().sum();
  const Vector explained = ((PL * post.feature_precision).array() * PL.array()).rowwise().sum();
  out.var.resize(P.rows());
  for (Index i = 0; i < P.rows(); ++i) {
    double latent = prior_var(i) - explained(i);
    if (latent < 0.0) {
      latent = 0.0;
      ++out.clipped;
    }
    out.var(i) = latent + post.noise;
  }
  return out;
}

Matrix sample_prior(const FgpModel& model, const Matrix& Z, std::uint64_t seed, Index count) {
  require(count >= 1, "sample_prior: count must be >= 1");
  const Matrix P = features(model, Z);
  const Vector sd = model.lambda().cwiseSqrt();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix W(model.dim(), count);
  for (Index c = 0; c < count; ++c)
    for (Index j = 0; j < model.dim(); ++j) W(j, c) = sd(j) * normal(rng);
  return P * W;
}

Vector sample_prior(const FgpModel& model, const Matrix& Z, std::uint64_t seed) {
  return sample_prior(model, Z, seed, 1).col(0);
}

}  // namespace fairgp
