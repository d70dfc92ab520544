#include "bccp/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bccp/error.hpp"

namespace bccp {

PredictionInterval::PredictionInterval(double lo, double hi)
    : lower(lo), upper(hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    std::ostringstream msg;
    msg << "invalid interval [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::invalid_argument, msg.str());
  }
}

IntervalSet::IntervalSet(std::span<const PredictionInterval> intervals)
    : segments_(intervals.begin(), intervals.end()) {
  std::sort(segments_.begin(), segments_.end(),
            [](const auto& a, const auto& b) {
              return a.lower < b.lower ||
                     (a.lower == b.lower && a.upper < b.upper);
            });
  std::vector<PredictionInterval> merged;
  merged.reserve(segments_.size());
  for (const auto& seg : segments_) {
    if (!merged.empty() && seg.lower <= merged.back().upper) {
      merged.back().upper = std::max(merged.back().upper, seg.upper);
    } else {
      merged.push_back(seg);
    }
  }
  segments_ = std::move(merged);
}

IntervalSet::IntervalSet(std::initializer_list<PredictionInterval> intervals)
    : IntervalSet(std::span<const PredictionInterval>(intervals.begin(),
                                                      intervals.size())) {}

bool IntervalSet::contains(double y) const noexcept {
  // Segments are sorted, so the candidate is the last one starting at or
  // before y.
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), y,
      [](double v, const PredictionInterval& s) { return v < s.lower; });
  if (it == segments_.begin()) return false;
  return std::prev(it)->contains(y);
}

double IntervalSet::total_width() const noexcept {
  double total = 0.0;
  for (const auto& s : segments_) total += s.width();
  return total;
}

IntervalSet unite(std::span<const PredictionInterval> intervals) {
  return IntervalSet(intervals);
}

PredictionInterval hull(const IntervalSet& set) {
  if (set.empty()) throw Error(ErrorCode::empty_set, "hull of an empty set");
  return {set.segments().front().lower, set.segments().back().upper};
}

BinPartition::BinPartition(std::vector<double> breakpoints, double support_min,
                           bool collapsed)
    : breakpoints_(std::move(breakpoints)),
      support_min_(support_min),
      collapsed_(collapsed) {
  if (std::isnan(support_min_) || support_min_ == kInf)
    throw Error(ErrorCode::invalid_cutpoints, "support minimum must be < +inf");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double b = breakpoints_[i];
    const double prev = i == 0 ? support_min_ : breakpoints_[i - 1];
    if (!std::isfinite(b) || !(b > prev)) {
      throw Error(ErrorCode::invalid_cutpoints,
                  "cutpoints must be finite, strictly increasing and above "
                  "the support minimum");
    }
  }
}

double BinPartition::bin_lower(std::size_t bin) const {
  if (bin >= bin_count()) throw Error(ErrorCode::invalid_argument, "bin index");
  return bin == 0 ? support_min_ : breakpoints_[bin - 1];
}

double BinPartition::bin_upper(std::size_t bin) const {
  if (bin >= bin_count()) throw Error(ErrorCode::invalid_argument, "bin index");
  return bin + 1 == bin_count() ? kInf : breakpoints_[bin];
}

std::size_t BinPartition::assign(double y) const {
  if (std::isnan(y) || y < support_min_) {
    std::ostringstream msg;
    msg << "value " << y << " is below the support minimum " << support_min_;
    throw Error(ErrorCode::out_of_support, msg.str());
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), y);
  return static_cast<std::size_t>(it - breakpoints_.begin());
}

double quantile_type7_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty())
    throw Error(ErrorCode::empty_calibration, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::invalid_argument, "quantile level outside [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile_type7(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_type7_sorted(values, p);
}

BinPartition bins_from_percentiles(std::span<const double> y, std::size_t k,
                                   double support_min) {
  if (y.empty())
    throw Error(ErrorCode::degenerate_partition, "no values to bin");
  if (k < 2) throw Error(ErrorCode::invalid_argument, "need at least 2 bins");
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> uniq = sorted;
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 2)
    throw Error(ErrorCode::degenerate_partition,
                "fewer than 2 distinct values; cannot form bins");
  if (k > uniq.size())
    throw Error(ErrorCode::invalid_argument,
                "more bins requested than distinct values");

  std::vector<double> breaks;
  bool collapsed = false;
  for (std::size_t j = 1; j < k; ++j) {
    const double q = quantile_type7_sorted(
        sorted, static_cast<double>(j) / static_cast<double>(k));
    const double floor_value = breaks.empty() ? support_min : breaks.back();
    if (q > floor_value) {
      breaks.push_back(q);
    } else {
      collapsed = true;
    }
  }
  return BinPartition(std::move(breaks), support_min, collapsed);
}

BinPartition bins_from_cutpoints(std::span<const double> cutpoints,
                                 double support_min) {
  return BinPartition(std::vector<double>(cutpoints.begin(), cutpoints.end()),
                      support_min);
}

}  // namespace bccp
