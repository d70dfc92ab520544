#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace bccp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lower, upper]. Either end may be infinite; lower <= upper.
struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;

  PredictionInterval() = default;
  PredictionInterval(double lo, double hi);

  bool contains(double y) const noexcept { return lower <= y && y <= upper; }
  double width() const noexcept { return upper - lower; }
  bool degenerate() const noexcept { return lower == upper; }

  friend bool operator==(const PredictionInterval&,
                         const PredictionInterval&) = default;
};

/// Sorted union of pairwise disjoint closed segments. Touching or overlapping
/// inputs are merged, so {[1,2],[2,3]} is stored as {[1,3]}.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::span<const PredictionInterval> intervals);
  IntervalSet(std::initializer_list<PredictionInterval> intervals);
  explicit IntervalSet(const PredictionInterval& single) : segments_{single} {}

  const std::vector<PredictionInterval>& segments() const noexcept {
    return segments_;
  }
  std::size_t size() const noexcept { return segments_.size(); }
  bool empty() const noexcept { return segments_.empty(); }

  bool contains(double y) const noexcept;
  /// Sum of segment lengths; +inf if any segment is unbounded.
  double total_width() const noexcept;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<PredictionInterval> segments_;
};

IntervalSet unite(std::span<const PredictionInterval> intervals);

/// [min lower, max upper] over all segments. Throws empty_set.
PredictionInterval hull(const IntervalSet& set);

/// Partition of the outcome axis into left-closed, right-open bins.
///
/// k breakpoints b_1 < ... < b_k give k+1 bins: [support_min, b_1),
/// [b_1, b_2), ..., [b_k, +inf). Bin indices are zero-based.
class BinPartition {
 public:
  BinPartition() = default;
  BinPartition(std::vector<double> breakpoints, double support_min,
               bool collapsed = false);

  /// A single bin covering the whole support.
  static BinPartition whole(double support_min = -kInf) {
    return BinPartition({}, support_min);
  }

  const std::vector<double>& breakpoints() const noexcept {
    return breakpoints_;
  }
  double support_min() const noexcept { return support_min_; }
  std::size_t bin_count() const noexcept { return breakpoints_.size() + 1; }
  double bin_lower(std::size_t bin) const;
  double bin_upper(std::size_t bin) const;

  /// True when tied percentile breakpoints were merged, leaving fewer bins
  /// than requested.
  bool collapsed() const noexcept { return collapsed_; }

  /// Throws out_of_support for y below support_min (or NaN).
  std::size_t assign(double y) const;

  friend bool operator==(const BinPartition&, const BinPartition&) = default;

 private:
  std::vector<double> breakpoints_;
  double support_min_ = -kInf;
  bool collapsed_ = false;
};

/// Sample quantile by linear interpolation between order statistics
/// (position 1 + (n-1)p, "type 7"). `sorted` must be ascending.
double quantile_type7_sorted(std::span<const double> sorted, double p);
double quantile_type7(std::vector<double> values, double p);

/// k bins with breakpoints at the empirical j/k quantiles of `y`. Tied
/// breakpoints, and breakpoints not above support_min, are dropped and the
/// partition is marked collapsed.
BinPartition bins_from_percentiles(std::span<const double> y, std::size_t k,
                                   double support_min = -kInf);

BinPartition bins_from_cutpoints(std::span<const double> cutpoints,
                                 double support_min);

inline std::size_t assign_bin(double y, const BinPartition& partition) {
  return partition.assign(y);
}

}  // namespace bccp
