#include "fairgp/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "fairgp/parallel_kernels.hpp"
#include "kernel_entry.hpp"

namespace fairgp {

std::string to_string(KernelFamily family) {
  return family == KernelFamily::RBF ? "rbf" : "linear";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "rbf") return KernelFamily::RBF;
  if (name == "linear") return KernelFamily::Linear;
  throw InvalidArgument("unknown kernel family '" + name + "' (expected rbf or linear)");
}

KernelSpec::KernelSpec(KernelFamily family, double lengthscale, double variance)
    : family_(family), lengthscale_(lengthscale), variance_(variance) {
  require(std::isfinite(variance) && variance > 0.0, "kernel variance must be positive");
  if (family == KernelFamily::RBF)
    require(std::isfinite(lengthscale) && lengthscale > 0.0,
            "RBF lengthscale must be positive");
}

KernelSpec KernelSpec::rbf(double lengthscale, double variance) {
  return KernelSpec(KernelFamily::RBF, lengthscale, variance);
}

KernelSpec KernelSpec::linear(double variance) {
  return KernelSpec(KernelFamily::Linear, 1.0, variance);
}

double eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
            const Eigen::Ref<const Vector>& z) {
  require(x.size() == z.size(), "kernel eval: dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(z.size()) + ")");
  if (spec.family() == KernelFamily::RBF) {
    const double sq = detail::squared_distance(x.data(), z.data(), x.size(), 1, 1);
    const double l = spec.lengthscale();
    return spec.variance() * std::exp(-sq / (2.0 * l * l));
  }
  return spec.variance() * detail::dot(x.data(), z.data(), x.size(), 1, 1);
}

Matrix gram(const KernelSpec& spec, const Matrix& X) {
  require(X.rows() >= 1, "gram: need at least one row");
  return omp::gram(spec, X);
}

Matrix cross_gram(const KernelSpec& spec, const Matrix& Z, const Matrix& X) {
  require(Z.cols() == X.cols(), "cross_gram: feature dimension mismatch (" +
                                    std::to_string(Z.cols()) + " vs " +
                                    std::to_string(X.cols()) + ")");
  return omp::cross_gram(spec, Z, X);
}

Matrix center_columns(const Matrix& K) { return omp::center_columns(K); }

Eigen::RowVectorXd column_means(const Matrix& K) { return omp::column_means(K); }

double median_pairwise_distance(const Matrix& X, Index max_rows) {
  const Index n = std::min(X.rows(), max_rows);
  require(n >= 2, "median heuristic needs at least two rows");
  std::vector<double> d = omp::pairwise_distances(X.topRows(n));
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double median = *mid;
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), mid);
    median = 0.5 * (median + lower);
  }
  return median > 0.0 ? median : 1.0;
}

}  // namespace fairgp
