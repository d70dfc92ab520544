#include "bccp/models.hpp"

#include <cmath>

#include "bccp/error.hpp"

namespace bccp {

Matrix with_intercept(const Matrix& features) {
  Matrix design(features.rows(), features.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(features.cols()) = features;
  return design;
}

LinearModel ols_fit(const Matrix& features, std::span<const double> y,
                    OutcomeTransform transform) {
  const auto rows = features.rows();
  if (static_cast<std::size_t>(rows) != y.size())
    throw Error(ErrorCode::shape_mismatch, "feature rows and y length differ");
  if (rows < features.cols() + 2)
    throw Error(ErrorCode::singular_design,
                "need at least (features + 2) rows for least squares");

  Vector target(rows);
  for (Eigen::Index i = 0; i < rows; ++i)
    target[i] = transform.forward(y[static_cast<std::size_t>(i)]);

  const Matrix design = with_intercept(features);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < design.cols())
    throw Error(ErrorCode::singular_design, "design matrix is rank deficient");
  return {qr.solve(target), transform};
}

Prediction predict(const LinearModel& model, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != model.feature_count())
    throw Error(ErrorCode::shape_mismatch, "feature length mismatch");
  double score = model.coefficients[0];
  for (std::size_t j = 0; j < x.size(); ++j)
    score += model.coefficients[static_cast<Eigen::Index>(j) + 1] * x[j];
  return {score, model.transform.inverse(score),
          model.transform.inverse_clamps(score)};
}

Predictions predict_rows(const LinearModel& model, const Matrix& features) {
  if (features.cols() != model.feature_count())
    throw Error(ErrorCode::shape_mismatch, "feature column count mismatch");
  const Vector scores = with_intercept(features) * model.coefficients;
  Predictions out;
  out.transformed.assign(scores.data(), scores.data() + scores.size());
  out.raw.reserve(out.transformed.size());
  for (double s : out.transformed) out.raw.push_back(model.transform.inverse(s));
  return out;
}

PredictionInterval round_count_interval(const PredictionInterval& interval) {
  auto half_up = [](double v) { return std::isfinite(v) ? std::floor(v + 0.5) : v; };
  const double lower = std::max(0.0, half_up(interval.lower));
  const double upper = std::max(lower, half_up(interval.upper));
  return {lower, upper};
}

IntervalSet round_count_set(const IntervalSet& set) {
  std::vector<PredictionInterval> rounded;
  rounded.reserve(set.size());
  for (const auto& seg : set.segments()) rounded.push_back(round_count_interval(seg));
  return IntervalSet(rounded);
}

}  // namespace bccp
