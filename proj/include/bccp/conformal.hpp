#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bccp/flags.hpp"
#include "bccp/interval.hpp"
#include "bccp/transform.hpp"

namespace bccp {

/// Absolute prediction error, the only nonconformity measure supported.
inline double nonconformity(double y, double y_hat) noexcept {
  return y >= y_hat ? y - y_hat : y_hat - y;
}

/// Rank ceil((n+1)(1-alpha)) of the order statistic used as the conformal
/// quantile. May exceed n, meaning the quantile is +inf.
std::size_t conformal_rank(std::size_t n, double alpha);

/// The r-th smallest score with r = conformal_rank(n, alpha), or +inf when
/// r > n. Throws empty_calibration on empty input.
double finite_sample_quantile(std::span<const double> scores, double alpha);

/// (1 + #{s >= candidate}) / (n + 1).
double conformal_pvalue(double candidate_score, std::span<const double> scores);

struct FlaggedInterval {
  PredictionInterval interval;
  Flags flags;
};

struct FlaggedSet {
  IntervalSet set;
  Flags flags;
};

struct CalibrationOptions {
  OutcomeTransform transform{};
  /// Substitute the whole bin for bins without calibration data instead of
  /// failing with empty_bin.
  bool allow_empty_bins = false;
};

/// Calibrated conformal state: global scores for standard conformal
/// prediction plus per-bin scores for the bin-conditional variant.
///
/// Scores are |T(y) - T(y_hat)| for the score transform T. Observed values,
/// bin cutpoints and returned intervals are all in raw outcome units; bin
/// membership is decided by the true y of each calibration record.
class ConformalCalibration {
 public:
  using Options = CalibrationOptions;

  ConformalCalibration(std::span<const double> y_true,
                       std::span<const double> y_pred, double alpha,
                       BinPartition partition = BinPartition::whole(),
                       Options options = {});
  ConformalCalibration(std::span<const double> y_true,
                       std::span<const double> y_pred, double alpha,
                       BinPartition partition, OutcomeTransform transform)
      : ConformalCalibration(y_true, y_pred, alpha, std::move(partition),
                             Options{transform, false}) {}

  /// Builds a calibration directly from quantiles, for when scores were
  /// aggregated elsewhere. `bin_quantiles` must have one entry per bin.
  static ConformalCalibration from_quantiles(BinPartition partition,
                                             double global_quantile,
                                             std::vector<double> bin_quantiles,
                                             double alpha,
                                             OutcomeTransform transform = {});

  double alpha() const noexcept { return alpha_; }
  const BinPartition& partition() const noexcept { return partition_; }
  OutcomeTransform transform() const noexcept { return transform_; }

  /// All scores, ascending.
  const std::vector<double>& scores() const noexcept { return scores_; }
  /// Scores of calibration records whose true y fell in `bin`, ascending.
  const std::vector<double>& bin_scores(std::size_t bin) const {
    return bin_scores_.at(bin);
  }
  double global_quantile() const noexcept { return global_q_; }
  double bin_quantile(std::size_t bin) const { return bin_q_.at(bin); }
  bool bin_is_fallback(std::size_t bin) const { return bin_fallback_.at(bin); }

  /// Calibration y range (raw units); both 0 when built from quantiles.
  double min_y() const noexcept { return min_y_; }
  double max_y() const noexcept { return max_y_; }

 private:
  ConformalCalibration() = default;

  double alpha_ = 0.1;
  BinPartition partition_;
  OutcomeTransform transform_;
  std::vector<double> scores_;
  std::vector<std::vector<double>> bin_scores_;
  double global_q_ = kInf;
  std::vector<double> bin_q_;
  std::vector<bool> bin_fallback_;
  double min_y_ = 0.0;
  double max_y_ = 0.0;
};

/// [y_hat - q, y_hat + q] on the score scale, clipped to the support and
/// mapped back to raw units. y_hat below the support is clamped and flagged.
FlaggedInterval scp_interval(double y_hat, const ConformalCalibration& calib);

/// Standard conformal interval around y_hat using the quantile of one bin,
/// intersected with that bin. nullopt when the intersection is empty.
std::optional<PredictionInterval> bccp_per_bin_interval(
    double y_hat, std::size_t bin, const ConformalCalibration& calib);

/// Union of the per-bin intervals: the discontiguous bin-conditional set.
FlaggedSet bccp_discontiguous(double y_hat, const ConformalCalibration& calib);

/// Hull of bccp_discontiguous.
FlaggedInterval bccp_contiguous(double y_hat, const ConformalCalibration& calib);

/// Brute-force conformal set: grid points whose p-value exceeds alpha,
/// merged into runs of consecutive accepted points. `scores` and `y_grid`
/// share one scale; the grid must be ascending.
FlaggedSet grid_interval(double y_hat, std::span<const double> scores,
                         std::span<const double> y_grid, double alpha);

/// `points` equally spaced values on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

/// Grid on the score scale spanning [T(support_min), T(max calibration y) +
/// 3 * max score] with `points` points. An infinite support minimum is
/// replaced by T(min calibration y) - 3 * max score.
std::vector<double> default_grid(const ConformalCalibration& calib,
                                 std::size_t points = 4001);

/// Cross-checks the analytic constructions against grid_interval on a grid
/// over the score scale. True when every accepted run matches the analytic
/// interval (clipped to the grid) within one grid step. The bin-conditional
/// check runs one grid search per bin on that bin's scores; bins without
/// stored scores are skipped.
bool scp_matches_grid(double y_hat, const ConformalCalibration& calib,
                      std::span<const double> grid);
bool bccp_matches_grid(double y_hat, const ConformalCalibration& calib,
                       std::span<const double> grid);

}  // namespace bccp
