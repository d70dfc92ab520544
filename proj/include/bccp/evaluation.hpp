#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bccp/baselines.hpp"
#include "bccp/interval.hpp"
#include "bccp/simulation.hpp"
#include "bccp/transform.hpp"

namespace bccp {

/// How records are grouped for conditional metrics. Quantile groupings are
/// resolved against the values being grouped (per replicate for the test
/// set); partition groupings are fixed.
class Grouping {
 public:
  /// k equal-count groups at the type-7 j/k quantiles; ties may leave groups
  /// empty. Labels "Q1".."Qk" (or "D1".. for k = 10).
  static Grouping quantiles(std::size_t k);
  static Grouping quartiles() { return quantiles(4); }
  /// Fixed bins; labels default to "bin1".."binN".
  static Grouping bins(BinPartition partition, std::vector<std::string> labels = {});

  bool is_quantile() const noexcept { return !partition_.has_value(); }
  std::size_t group_count() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::string describe() const;

  /// Breakpoints for `values`: the fixed partition, or the quantiles.
  std::vector<double> resolve(std::span<const double> values) const;
  /// Group of `v` under resolved breakpoints (left-closed, right-open).
  static std::size_t assign(double v, std::span<const double> breakpoints);

 private:
  std::size_t k_ = 4;
  std::optional<BinPartition> partition_;
  std::vector<std::string> labels_;
};

/// Sufficient statistics for one group of records.
struct GroupStats {
  std::string group;
  std::size_t n = 0;
  std::size_t covered = 0;
  std::size_t finite_width_count = 0;
  std::size_t inf_width_count = 0;
  std::size_t discontiguous = 0;
  double width_sum = 0.0;

  void add(const IntervalSet& set, double y_true);
  void merge(const GroupStats& other);
  double coverage() const;
  /// Binomial standard error sqrt(p(1-p)/n).
  double binomial_se() const;
  /// Mean over finite-width sets; NaN when there are none.
  double mean_width() const;
  double discontiguity_rate() const;
};

struct CoverageTable {
  GroupStats overall;
  std::vector<GroupStats> groups;
};

/// Coverage, width and discontiguity grouped by `group_values` (the true y
/// for conditional coverage, or y_hat for width-by-prediction tables).
CoverageTable summarize(std::span<const IntervalSet> intervals,
                        std::span<const double> y_true,
                        std::span<const double> group_values,
                        const Grouping& grouping);

/// Groups defined by the true y.
inline CoverageTable coverage(std::span<const IntervalSet> intervals,
                              std::span<const double> y_true,
                              const Grouping& grouping) {
  return summarize(intervals, y_true, y_true, grouping);
}

struct WidthRow {
  std::string group;
  double lower = 0.0;  // group range of the grouping variable
  double upper = 0.0;
  std::size_t n = 0;
  double mean_width = 0.0;
  std::size_t inf_width_count = 0;
};

/// Mean total width per group of `values`. Infinite widths are counted and
/// left out of the mean.
std::vector<WidthRow> mean_width(std::span<const IntervalSet> intervals,
                                 std::span<const double> values,
                                 const Grouping& grouping);

// ---------------------------------------------------------------------------
// Replication harness

enum class Method {
  scp,
  bccp_d,
  bccp_c,
  bootstrap,
  bootstrap_log,
  lognormal,
  poisson,
  negbinom,
  quantreg,
};

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
inline bool is_bin_conditional(Method m) {
  return m == Method::bccp_d || m == Method::bccp_c;
}

/// "percentiles:k" or comma-separated cutpoints.
struct BinSpec {
  enum class Kind { none, percentiles, cutpoints };
  Kind kind = Kind::none;
  std::size_t k = 0;
  std::vector<double> cutpoints;

  static BinSpec parse(std::string_view text);
  std::string to_string() const;
  BinPartition build(std::span<const double> calibration_y, double support_min) const;
};

struct MethodSpec {
  Method method = Method::scp;
  BinSpec bins;
  std::string label;  // report name; derived when empty

  /// "name" or "name=bins", e.g. "bccp-d=percentiles:4", "bccp-d=1,3,8".
  static MethodSpec parse(std::string_view text);
  std::string display_label() const;
};

enum class Dgp { lognormal, zicount };
std::string_view dgp_name(Dgp d);
Dgp parse_dgp(std::string_view name);

struct StudyConfig {
  Dgp dgp = Dgp::lognormal;
  std::size_t n = 10'000;
  double lognormal_sigma = 0.5;
  CountDgpParams count;
  SplitProportions split{0.5, 0.25, 0.25};
  /// Scale of the point model and of the log-scale baselines.
  OutcomeTransform model_transform{OutcomeTransform::Kind::log};
  /// Scale of conformal scores.
  OutcomeTransform score_transform{};
  double support_min = 0.0;
  double alpha = 0.1;
  std::vector<MethodSpec> methods;
  Grouping grouping = Grouping::quartiles();
  std::size_t width_groups = 10;  // equal-count groups of y_hat
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  std::size_t bootstrap_draws = 2000;
  ResidualSign residual_sign = ResidualSign::prediction_minus_truth;
  bool round_counts = false;
  bool allow_empty_bins = false;
  unsigned threads = 0;  // 0: hardware concurrency

  /// Log-normal DGP, n = 10,000 split 5,000/2,500/2,500, log-scale OLS,
  /// conformal scores on the raw scale, quartile groups.
  static StudyConfig lognormal_study();
  /// Zero-inflated counts split 70/20/10, log1p OLS and scores, groups
  /// zeros vs non-zeros.
  static StudyConfig count_study();
};

struct ReportRow {
  std::string method;
  std::string group;
  std::size_t n = 0;             // records pooled over replicates
  double coverage = 0.0;         // pooled
  double coverage_se = 0.0;      // sd of replicate coverages / sqrt(R)
  double mean_width = 0.0;       // pooled over finite widths
  double mean_width_se = 0.0;
  std::size_t inf_width_count = 0;
  double discontiguity_rate = 0.0;
};

struct MethodReplicate {
  std::vector<GroupStats> groups;        // [0] is "all"
  std::vector<GroupStats> width_groups;  // by y_hat
};

struct ReplicateResult {
  std::vector<MethodReplicate> methods;
};

/// One replicate: generate, split, fit, calibrate every method, evaluate.
ReplicateResult run_replicate(const StudyConfig& config, std::size_t replicate);

struct ReplicationReport {
  std::vector<ReportRow> rows;
  std::vector<ReportRow> width_rows;  // grouped by y_hat
  std::size_t replications = 0;

  /// Throws invalid_argument when absent.
  const ReportRow& row(std::string_view method, std::string_view group) const;
};

/// Per-group rows from a single run's table; se is binomial.
std::vector<ReportRow> report_rows(std::string_view method,
                                   const CoverageTable& table);

/// Aggregate replicate results in replicate order.
ReplicationReport aggregate(const StudyConfig& config,
                            std::span<const ReplicateResult> replicates);

/// Runs config.replications replicates (in parallel when threads allow) and
/// aggregates them. Deterministic given config.seed regardless of threads.
ReplicationReport run_replications(const StudyConfig& config);

}  // namespace bccp
