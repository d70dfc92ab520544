#include "bccp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bccp/error.hpp"

namespace bccp {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
}

// Clamp y_hat into the support and map it onto the score scale.
double to_score_scale(double y_hat, const ConformalCalibration& calib,
                      Flags& flags) {
  const double support = calib.partition().support_min();
  if (y_hat < support) {
    y_hat = support;
    flags.set(Flag::clamped_prediction);
  }
  return calib.transform().forward(y_hat);
}

// [center - q, center + q] on the score scale intersected with the raw range
// [lo, hi). Endpoints that hit the range are returned as the raw bounds
// themselves, so adjacent bins meet exactly at their breakpoint.
std::optional<PredictionInterval> clip_to_range(double center, double q,
                                                double lo, double hi,
                                                OutcomeTransform t) {
  const double lo_t = t.forward_bound(lo);
  const double hi_t = hi == kInf ? kInf : t.forward_bound(hi);
  const double a = center - q;
  const double b = center + q;
  if (!(a < hi_t) || b < lo_t) return std::nullopt;
  const double lower = a <= lo_t ? lo : std::max(lo, t.inverse(a));
  const double upper = b >= hi_t ? hi : std::min(hi, t.inverse(b));
  return PredictionInterval(lower, std::max(lower, upper));
}

}  // namespace

std::size_t conformal_rank(std::size_t n, double alpha) {
  check_alpha(alpha);
  // The guard keeps exact products such as 100 * 0.9 from landing a hair
  // above an integer and rounding up a rank.
  const double raw = static_cast<double>(n + 1) * (1.0 - alpha);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

double finite_sample_quantile(std::span<const double> scores, double alpha) {
  if (scores.empty())
    throw Error(ErrorCode::empty_calibration, "no calibration scores");
  const std::size_t r = conformal_rank(scores.size(), alpha);
  if (r > scores.size()) return kInf;
  if (r == 0) return 0.0;
  std::vector<double> work(scores.begin(), scores.end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(r - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

double conformal_pvalue(double candidate_score, std::span<const double> scores) {
  if (scores.empty())
    throw Error(ErrorCode::empty_calibration, "no calibration scores");
  const auto at_least = std::count_if(
      scores.begin(), scores.end(),
      [candidate_score](double s) { return s >= candidate_score; });
  return static_cast<double>(at_least + 1) /
         static_cast<double>(scores.size() + 1);
}

ConformalCalibration::ConformalCalibration(std::span<const double> y_true,
                                           std::span<const double> y_pred,
                                           double alpha, BinPartition partition,
                                           Options options)
    : alpha_(alpha),
      partition_(std::move(partition)),
      transform_(options.transform) {
  check_alpha(alpha);
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::shape_mismatch,
                "y_true and y_pred lengths differ");
  if (y_true.empty())
    throw Error(ErrorCode::empty_calibration, "empty calibration set");

  const std::size_t bins = partition_.bin_count();
  bin_scores_.assign(bins, {});
  scores_.reserve(y_true.size());
  min_y_ = kInf;
  max_y_ = -kInf;
  const double support = partition_.support_min();
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double y = y_true[i];
    const std::size_t bin = partition_.assign(y);
    const double pred = std::max(y_pred[i], support);
    const double s = nonconformity(transform_.forward(y), transform_.forward(pred));
    scores_.push_back(s);
    bin_scores_[bin].push_back(s);
    min_y_ = std::min(min_y_, y);
    max_y_ = std::max(max_y_, y);
  }
  std::sort(scores_.begin(), scores_.end());
  global_q_ = finite_sample_quantile(scores_, alpha_);

  bin_q_.resize(bins);
  bin_fallback_.assign(bins, false);
  for (std::size_t b = 0; b < bins; ++b) {
    auto& s = bin_scores_[b];
    std::sort(s.begin(), s.end());
    if (s.empty()) {
      if (!options.allow_empty_bins) {
        throw Error(ErrorCode::empty_bin,
                    "bin " + std::to_string(b) + " [" +
                        std::to_string(partition_.bin_lower(b)) + ", " +
                        std::to_string(partition_.bin_upper(b)) +
                        ") has no calibration data");
      }
      bin_q_[b] = kInf;
      bin_fallback_[b] = true;
    } else {
      bin_q_[b] = finite_sample_quantile(s, alpha_);
    }
  }
}

ConformalCalibration ConformalCalibration::from_quantiles(
    BinPartition partition, double global_quantile,
    std::vector<double> bin_quantiles, double alpha, OutcomeTransform transform) {
  check_alpha(alpha);
  if (bin_quantiles.size() != partition.bin_count())
    throw Error(ErrorCode::shape_mismatch, "one quantile per bin required");
  auto bad = [](double q) { return std::isnan(q) || q < 0.0; };
  if (bad(global_quantile) || std::any_of(bin_quantiles.begin(), bin_quantiles.end(), bad))
    throw Error(ErrorCode::invalid_argument, "quantiles must be nonnegative");
  ConformalCalibration c;
  c.alpha_ = alpha;
  c.partition_ = std::move(partition);
  c.transform_ = transform;
  c.global_q_ = global_quantile;
  c.bin_q_ = std::move(bin_quantiles);
  c.bin_scores_.assign(c.bin_q_.size(), {});
  c.bin_fallback_.assign(c.bin_q_.size(), false);
  return c;
}

FlaggedInterval scp_interval(double y_hat, const ConformalCalibration& calib) {
  FlaggedInterval out;
  const double center = to_score_scale(y_hat, calib, out.flags);
  const double q = calib.global_quantile();
  if (q == kInf) out.flags.set(Flag::infinite_quantile);
  // The whole support is never empty and contains the clamped center.
  out.interval = *clip_to_range(center, q, calib.partition().support_min(),
                                kInf, calib.transform());
  return out;
}

std::optional<PredictionInterval> bccp_per_bin_interval(
    double y_hat, std::size_t bin, const ConformalCalibration& calib) {
  const auto& partition = calib.partition();
  if (bin >= partition.bin_count())
    throw Error(ErrorCode::invalid_argument, "bin index out of range");
  Flags ignored;
  const double center = to_score_scale(y_hat, calib, ignored);
  return clip_to_range(center, calib.bin_quantile(bin), partition.bin_lower(bin),
                       partition.bin_upper(bin), calib.transform());
}

FlaggedSet bccp_discontiguous(double y_hat, const ConformalCalibration& calib) {
  FlaggedSet out;
  const auto& partition = calib.partition();
  const double center = to_score_scale(y_hat, calib, out.flags);
  std::vector<PredictionInterval> pieces;
  pieces.reserve(partition.bin_count());
  for (std::size_t b = 0; b < partition.bin_count(); ++b) {
    const double q = calib.bin_quantile(b);
    auto piece = clip_to_range(center, q, partition.bin_lower(b),
                               partition.bin_upper(b), calib.transform());
    if (!piece) continue;
    if (calib.bin_is_fallback(b)) out.flags.set(Flag::empty_bin_fallback);
    else if (q == kInf) out.flags.set(Flag::infinite_quantile);
    pieces.push_back(*piece);
  }
  out.set = IntervalSet(pieces);
  return out;
}

FlaggedInterval bccp_contiguous(double y_hat, const ConformalCalibration& calib) {
  auto d = bccp_discontiguous(y_hat, calib);
  return {hull(d.set), d.flags};
}

FlaggedSet grid_interval(double y_hat, std::span<const double> scores,
                         std::span<const double> y_grid, double alpha) {
  check_alpha(alpha);
  if (scores.empty())
    throw Error(ErrorCode::empty_calibration, "no calibration scores");
  if (!std::is_sorted(y_grid.begin(), y_grid.end()))
    throw Error(ErrorCode::invalid_argument, "grid must be ascending");

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double n1 = static_cast<double>(sorted.size() + 1);
  auto accepted = [&](double y) {
    const double s = nonconformity(y, y_hat);
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), s);
    const auto at_least = static_cast<double>(sorted.end() - first);
    return (at_least + 1.0) / n1 > alpha;
  };

  std::vector<PredictionInterval> runs;
  std::optional<double> run_start;
  double last = 0.0;
  for (double y : y_grid) {
    if (accepted(y)) {
      if (!run_start) run_start = y;
      last = y;
    } else if (run_start) {
      runs.emplace_back(*run_start, last);
      run_start.reset();
    }
  }
  if (run_start) runs.emplace_back(*run_start, last);

  FlaggedSet out{IntervalSet(runs), {}};
  if (out.set.empty()) out.flags.set(Flag::empty_acceptance);
  return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::invalid_argument, "grid needs finite lo < hi and >= 2 points");
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

std::vector<double> default_grid(const ConformalCalibration& calib,
                                 std::size_t points) {
  if (calib.scores().empty())
    throw Error(ErrorCode::empty_calibration, "calibration has no scores");
  const auto t = calib.transform();
  const double max_score = calib.scores().back();
  double lo = t.forward_bound(calib.partition().support_min());
  if (!std::isfinite(lo)) lo = t.forward(calib.min_y()) - 3.0 * max_score;
  double hi = t.forward(calib.max_y()) + 3.0 * max_score;
  if (!(hi > lo)) hi = lo + 1.0;
  return linear_grid(lo, hi, points);
}

}  // namespace bccp

namespace bccp {
namespace {

// Compares the grid acceptance set for scores against the analytic range
// [lo, hi] on the score scale, restricted to grid points in [g_lo, g_hi).
bool range_matches(double center, std::span<const double> scores, double alpha,
                   std::span<const double> grid, double lo, double hi) {
  if (grid.size() < 2) return true;
  const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  const auto found = grid_interval(center, scores, grid, alpha);
  const double el = std::max(lo, grid.front());
  const double eu = std::min(hi, grid.back());
  if (found.set.empty()) return el > eu || eu - el < step;
  if (found.set.size() != 1) return false;
  const auto h = hull(found.set);
  return std::abs(h.lower - el) <= step * (1 + 1e-9) &&
         std::abs(h.upper - eu) <= step * (1 + 1e-9);
}

}  // namespace

bool scp_matches_grid(double y_hat, const ConformalCalibration& calib,
                      std::span<const double> grid) {
  Flags ignored;
  const double center = to_score_scale(y_hat, calib, ignored);
  const double q = calib.global_quantile();
  const double support_t = calib.transform().forward_bound(calib.partition().support_min());
  std::vector<double> in_support;
  for (double g : grid)
    if (g >= support_t) in_support.push_back(g);
  return range_matches(center, calib.scores(), calib.alpha(), in_support,
                       std::max(center - q, support_t), center + q);
}

bool bccp_matches_grid(double y_hat, const ConformalCalibration& calib,
                       std::span<const double> grid) {
  Flags ignored;
  const double center = to_score_scale(y_hat, calib, ignored);
  const auto& partition = calib.partition();
  const auto t = calib.transform();
  for (std::size_t b = 0; b < partition.bin_count(); ++b) {
    if (calib.bin_scores(b).empty()) continue;
    const double lo = t.forward_bound(partition.bin_lower(b));
    const double hi = partition.bin_upper(b) == kInf ? kInf : t.forward_bound(partition.bin_upper(b));
    std::vector<double> in_bin;
    for (double g : grid)
      if (g >= lo && g < hi) in_bin.push_back(g);
    const double q = calib.bin_quantile(b);
    const double upper = std::min(center + q, in_bin.empty() ? hi : in_bin.back());
    if (!range_matches(center, calib.bin_scores(b), calib.alpha(), in_bin,
                       std::max(center - q, lo), upper))
      return false;
  }
  return true;
}

}  // namespace bccp
