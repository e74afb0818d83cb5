#include "fairgp/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fairgp {

namespace {

std::vector<Index> class_rows(const Vector& y, double label) {
  std::vector<Index> rows;
  for (Index i = 0; i < y.size(); ++i)
    if (y(i) == label) rows.push_back(i);
  return rows;
}

Vector conditional_score(const Vector& yhat, const Matrix& S, const Vector& y, double label) {
  require(y.size() == yhat.size() && S.rows() == yhat.size(),
          "fairness score: length mismatch between predictions, labels and S");
  for (Index i = 0; i < y.size(); ++i)
    require(y(i) == 0.0 || y(i) == 1.0, "fairness score: labels must be binary {0,1}");
  const std::vector<Index> rows = class_rows(y, label);
  const std::string name = label == 1.0 ? "Y=1" : "Y=0";
  if (rows.empty()) throw InvalidArgument("fairness score: conditioning class " + name + " is empty");
  if (rows.size() < 2)
    throw InvalidArgument("fairness score: conditioning class " + name + " has fewer than 2 rows");
  const auto k = static_cast<Index>(rows.size());
  Vector sub_hat(k);
  Matrix sub_S(k, S.cols());
  for (Index a = 0; a < k; ++a) {
    sub_hat(a) = yhat(rows[a]);
    sub_S.row(a) = S.row(rows[a]);
  }
  return sp_score(sub_hat, sub_S);
}

}  // namespace

CorrScore abs_corr(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "abs_corr: length mismatch");
  require(a.size() >= 2, "abs_corr: need at least two observations");
  const Eigen::ArrayXd ca = a.array() - a.mean();
  const Eigen::ArrayXd cb = b.array() - b.mean();
  const double va = ca.square().sum();
  const double vb = cb.square().sum();
  CorrScore out;
  const double scale_a = a.cwiseAbs().maxCoeff();
  const double scale_b = b.cwiseAbs().maxCoeff();
  const auto tiny = [](double v, double scale, Index n) {
    return v <= 1e-28 * scale * scale * static_cast<double>(n) || v == 0.0;
  };
  if (tiny(va, scale_a, a.size()) || tiny(vb, scale_b, b.size())) {
    out.degenerate = true;
    return out;
  }
  out.value = std::min(1.0, std::abs((ca * cb).sum()) / std::sqrt(va * vb));
  return out;
}

Vector sp_score(const Vector& yhat, const Matrix& S, std::vector<bool>* degenerate) {
  require(S.rows() == yhat.size(), "sp_score: length mismatch between predictions and S");
  Vector out(S.cols());
  if (degenerate != nullptr) degenerate->assign(S.cols(), false);
  for (Index j = 0; j < S.cols(); ++j) {
    const CorrScore c = abs_corr(yhat, S.col(j));
    out(j) = c.value;
    if (degenerate != nullptr) (*degenerate)[j] = c.degenerate;
  }
  return out;
}

Vector eop_score(const Vector& yhat, const Matrix& S, const Vector& y) {
  return conditional_score(yhat, S, y, 1.0);
}

Vector eo_score(const Vector& yhat, const Matrix& S, const Vector& y) {
  return conditional_score(yhat, S, y, 1.0).cwiseMax(conditional_score(yhat, S, y, 0.0));
}

double rmse(const Vector& yhat, const Vector& y) {
  require(yhat.size() == y.size(), "rmse: length mismatch");
  require(y.size() >= 1, "rmse: empty input");
  return std::sqrt((yhat - y).squaredNorm() / static_cast<double>(y.size()));
}

double misclassification(const Vector& yhat_labels, const Vector& y) {
  require(yhat_labels.size() == y.size(), "misclassification: length mismatch");
  require(y.size() >= 1, "misclassification: empty input");
  Index wrong = 0;
  for (Index i = 0; i < y.size(); ++i)
    if (yhat_labels(i) != y(i)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

Vector threshold_labels(const Vector& yhat, double threshold) {
  return (yhat.array() >= threshold).cast<double>();
}

EvalReport evaluate(const Vector& yhat, const Vector& y, const Matrix& S, bool binary,
                    bool score_labels) {
  require(yhat.size() == y.size() && S.rows() == y.size(), "evaluate: length mismatch");
  EvalReport report;
  report.n_test = y.size();
  const Vector labels = binary ? threshold_labels(yhat) : Vector();
  const Vector& scored = binary && score_labels ? labels : yhat;
  std::vector<bool> flags;
  report.sp = sp_score(scored, S, &flags);
  report.degenerate_scores = std::count(flags.begin(), flags.end(), true);
  if (binary) {
    report.error = misclassification(labels, y);
    report.eop = eop_score(scored, S, y);
    report.eo = eo_score(scored, S, y);
  } else {
    report.error = rmse(yhat, y);
  }
  return report;
}

}  // namespace fairgp
