#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fairgp/common.hpp"
#include "fairgp/kernel.hpp"

namespace fairgp {

enum class MeanFunction {
  Zero,      // plain zero-mean prior over the model subspace
  LinearPi,  // Pi(x) beta with beta from generalized least squares
};

struct FitConfig {
  int max_iters = 5000;
  double init_log_lambda = 0.0;
  double init_log_noise = 0.0;   // used only when init_log_noise_set
  bool init_log_noise_set = false;  // otherwise log(0.1 var(y))
  double convergence_tol = 1e-10;   // relative LML change, with a small gradient
  double gradient_tol = 1e-6;       // max-abs gradient entry
  double initial_step = 0.1;       // scale of the initial inverse Hessian
  double armijo = 1e-4;
  int max_backtracks = 60;
  double noise_floor_ratio = 1e-8;  // sigma_n^2 >= ratio * var(y)
  double min_log_lambda = -30.0;
  double max_log_lambda = 30.0;
  MeanFunction mean = MeanFunction::Zero;
  bool center_targets = true;       // subtract mean(y) before fitting
};

struct FitTrace {
  std::vector<double> accepted_lml;  // LML after every accepted step, init first
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Fair GP  f ~ GP(0, Pi(.) Lambda Pi(.)^T)  with Pi(z) = (k(z, X) - 1^T K / n) E
/// and Lambda = diag(exp(log_lambda)), observed with Gaussian noise.
///
/// Immutable. The posterior is stored in Woodbury form: the n x n covariance
/// C = Phi Lambda Phi^T + s2 I is factored through the d x d matrix
/// I + Lambda^{1/2} Phi^T Phi Lambda^{1/2} / s2.
class FgpModel {
 public:
  /// Model with given hyperparameters and no targets attached.
  static FgpModel create(const KernelSpec& spec, const Matrix& Xtrain, const Matrix& E,
                         const Vector& log_lambda, double log_noise);

  /// Copy with training targets attached (enables predict).
  FgpModel with_targets(const Vector& y, double y_offset = 0.0,
                        const Vector& mean_beta = Vector()) const;

  /// Copy with new hyperparameters, dropping targets.
  FgpModel with_hyperparameters(const Vector& log_lambda, double log_noise) const;

  const KernelSpec& spec() const { return spec_; }
  const Matrix& Xtrain() const { return Xtrain_; }
  const Eigen::RowVectorXd& train_col_means() const { return col_means_; }
  const Matrix& E() const { return E_; }
  const Vector& log_lambda() const { return log_lambda_; }
  double log_noise() const { return log_noise_; }
  double noise_variance() const;
  Vector lambda() const;
  const Matrix& train_features() const { return Phi_; }
  bool fitted() const { return has_targets_; }
  const Vector& targets() const { return y_; }  // offset already removed
  double y_offset() const { return y_offset_; }
  const Vector& mean_beta() const { return beta_; }
  /// Phi^T C^{-1} (y - Phi beta); empty until targets are attached.
  const Vector& alpha_features() const { return alpha_proj_; }
  Index dim() const { return E_.cols(); }

  // Posterior helpers in the d-dimensional feature space.
  struct Posterior;
  const Posterior& posterior() const { return *posterior_; }

  /// Rebuild from stored fields (deserialization); col_means are checked
  /// against the Gram matrix of Xtrain.
  static FgpModel restore(const KernelSpec& spec, const Matrix& Xtrain,
                          const Eigen::RowVectorXd& col_means, const Matrix& E,
                          const Vector& log_lambda, double log_noise, const Vector* y,
                          double y_offset, const Vector& mean_beta);

 private:
  FgpModel() = default;
  void refresh_posterior();

  KernelSpec spec_ = KernelSpec::linear();
  Matrix Xtrain_;
  Eigen::RowVectorXd col_means_;
  Matrix E_;
  Vector log_lambda_;
  double log_noise_ = 0.0;
  Matrix Phi_;
  bool has_targets_ = false;
  Vector y_;
  double y_offset_ = 0.0;
  Vector beta_;
  Vector alpha_proj_;  // Phi^T C^{-1} (y - Phi beta)
  std::shared_ptr<const Posterior> posterior_;
};

struct FgpModel::Posterior {
  Matrix gram;          // Phi^T Phi
  Vector lambda;        // diag(Lambda)
  double noise = 0.0;   // s2
  Eigen::LLT<Matrix> inner;  // I + D G D / s2 with D = Lambda^{1/2}
  Matrix feature_precision;  // Phi^T C^{-1} Phi
  double log_det = 0.0;      // log det C
  double trace_inverse = 0.0;  // tr C^{-1}
  Index n = 0;
};

/// Pi(Z), t x d.
Matrix features(const FgpModel& model, const Matrix& Z);

/// Zero-mean Gaussian evidence of y under the model's prior.
double log_marginal_likelihood(const FgpModel& model, const Vector& y);

struct LmlGradient {
  Vector log_lambda;
  double log_noise = 0.0;
};

/// Analytic gradient of the evidence in (log_lambda, log_noise).
LmlGradient lml_gradient(const FgpModel& model, const Vector& y);

/// Projected BFGS with backtracking on (log_lambda, log_noise); returns the
/// best iterate with targets attached.
FgpModel fit(const KernelSpec& spec, const Matrix& Xtrain, const Vector& y, const Matrix& E,
             const FitConfig& config = {}, FitTrace* trace = nullptr);

struct Prediction {
  Vector mean;
  Vector var;
  Index clipped = 0;  // points whose latent variance came out negative
};

Prediction predict(const FgpModel& model, const Matrix& Z);

/// One prior draw Pi(Z) w with w ~ N(0, Lambda).
Vector sample_prior(const FgpModel& model, const Matrix& Z, std::uint64_t seed);

/// `count` prior draws as columns (t x count), one RNG stream.
Matrix sample_prior(const FgpModel& model, const Matrix& Z, std::uint64_t seed, Index count);

}  // namespace fairgp
