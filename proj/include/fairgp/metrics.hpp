#pragma once

#include <optional>
#include <vector>

#include "fairgp/common.hpp"

namespace fairgp {

struct CorrScore {
  double value = 0.0;       // |Pearson correlation| in [0, 1]
  bool degenerate = false;  // an input was constant; value is 0
};

CorrScore abs_corr(const Vector& a, const Vector& b);

/// Per-column scores; `degenerate` (if given) receives one flag per column.
Vector sp_score(const Vector& yhat, const Matrix& S, std::vector<bool>* degenerate = nullptr);
Vector eop_score(const Vector& yhat, const Matrix& S, const Vector& y);
Vector eo_score(const Vector& yhat, const Matrix& S, const Vector& y);

double rmse(const Vector& yhat, const Vector& y);
double misclassification(const Vector& yhat_labels, const Vector& y);

/// 1 where yhat >= threshold, else 0.
Vector threshold_labels(const Vector& yhat, double threshold = 0.5);

struct EvalReport {
  Vector sp;
  std::optional<Vector> eop;
  std::optional<Vector> eo;
  double error = 0.0;  // misclassification rate or RMSE
  Index n_test = 0;
  Index degenerate_scores = 0;
};

/// Scores predictions. For binary targets the error is the misclassification
/// rate of yhat thresholded at 0.5 and EOP/EO are filled; fairness scores use
/// the continuous yhat unless score_labels is set.
EvalReport evaluate(const Vector& yhat, const Vector& y, const Matrix& S, bool binary,
                    bool score_labels = false);

}  // namespace fairgp
