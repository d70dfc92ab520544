#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bccp/interval.hpp"
#include "bccp/transform.hpp"

namespace bccp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Prepends a column of ones.
Matrix with_intercept(const Matrix& features);

struct LinearModel {
  Vector coefficients;  // intercept first, then one per feature column
  OutcomeTransform transform;

  Eigen::Index feature_count() const { return coefficients.size() - 1; }
};

/// Least squares of T(y) on the features (plus intercept).
LinearModel ols_fit(const Matrix& features, std::span<const double> y,
                    OutcomeTransform transform = {});

struct Prediction {
  double transformed = 0.0;
  double raw = 0.0;
  bool clamped = false;  // log1p inverse hit the zero clamp
};

Prediction predict(const LinearModel& model, std::span<const double> x);

struct Predictions {
  std::vector<double> transformed;
  std::vector<double> raw;
};
/// Row-wise predict over a feature matrix.
Predictions predict_rows(const LinearModel& model, const Matrix& features);

/// Rounds both bounds half-up to integers and clamps the lower bound at 0.
PredictionInterval round_count_interval(const PredictionInterval& interval);
IntervalSet round_count_set(const IntervalSet& set);

}  // namespace bccp
