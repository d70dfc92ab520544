#include "bccp/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "bccp/baselines.hpp"
#include "bccp/conformal.hpp"
#include "bccp/error.hpp"
#include "bccp/models.hpp"
#include "bccp/rng.hpp"

namespace bccp {

// ---------------------------------------------------------------------------
// Grouping

Grouping Grouping::quantiles(std::size_t k) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "need at least one group");
  Grouping g;
  g.k_ = k;
  const char prefix = k == 10 ? 'D' : 'Q';
  for (std::size_t i = 1; i <= k; ++i) g.labels_.push_back(prefix + std::to_string(i));
  return g;
}

Grouping Grouping::bins(BinPartition partition, std::vector<std::string> labels) {
  Grouping g;
  g.k_ = partition.bin_count();
  if (labels.empty()) {
    for (std::size_t i = 1; i <= g.k_; ++i) labels.push_back("bin" + std::to_string(i));
  }
  if (labels.size() != g.k_)
    throw Error(ErrorCode::invalid_argument, "one label per bin required");
  g.labels_ = std::move(labels);
  g.partition_ = std::move(partition);
  return g;
}

std::string Grouping::describe() const {
  if (is_quantile()) return "quantiles:" + std::to_string(k_);
  std::string out = "cutpoints:";
  for (std::size_t i = 0; i < partition_->breakpoints().size(); ++i) {
    if (i) out += ',';
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, partition_->breakpoints()[i]);
    out.append(buf, res.ptr);
  }
  return out;
}

std::vector<double> Grouping::resolve(std::span<const double> values) const {
  if (partition_) return partition_->breakpoints();
  if (values.empty()) return std::vector<double>(k_ - 1, 0.0);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> breaks;
  for (std::size_t j = 1; j < k_; ++j)
    breaks.push_back(quantile_type7_sorted(sorted, static_cast<double>(j) / static_cast<double>(k_)));
  return breaks;
}

std::size_t Grouping::assign(double v, std::span<const double> breakpoints) {
  return static_cast<std::size_t>(
      std::upper_bound(breakpoints.begin(), breakpoints.end(), v) - breakpoints.begin());
}

// ---------------------------------------------------------------------------
// GroupStats

void GroupStats::add(const IntervalSet& set, double y_true) {
  ++n;
  if (set.contains(y_true)) ++covered;
  const double w = set.total_width();
  if (std::isfinite(w)) {
    width_sum += w;
    ++finite_width_count;
  } else {
    ++inf_width_count;
  }
  if (set.size() > 1) ++discontiguous;
}

void GroupStats::merge(const GroupStats& other) {
  n += other.n;
  covered += other.covered;
  finite_width_count += other.finite_width_count;
  inf_width_count += other.inf_width_count;
  discontiguous += other.discontiguous;
  width_sum += other.width_sum;
}

double GroupStats::coverage() const {
  return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                : static_cast<double>(covered) / static_cast<double>(n);
}

double GroupStats::binomial_se() const {
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  const double p = coverage();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double GroupStats::mean_width() const {
  return finite_width_count == 0
             ? std::numeric_limits<double>::quiet_NaN()
             : width_sum / static_cast<double>(finite_width_count);
}

double GroupStats::discontiguity_rate() const {
  return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                : static_cast<double>(discontiguous) / static_cast<double>(n);
}

CoverageTable summarize(std::span<const IntervalSet> intervals,
                        std::span<const double> y_true,
                        std::span<const double> group_values,
                        const Grouping& grouping) {
  if (intervals.size() != y_true.size() || group_values.size() != y_true.size())
    throw Error(ErrorCode::shape_mismatch,
                "intervals, y_true and grouping values must have equal lengths");
  CoverageTable table;
  table.overall.group = "all";
  for (const auto& label : grouping.labels()) table.groups.push_back(GroupStats{label});
  const auto breaks = grouping.resolve(group_values);
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    table.overall.add(intervals[i], y_true[i]);
    table.groups[Grouping::assign(group_values[i], breaks)].add(intervals[i], y_true[i]);
  }
  return table;
}

std::vector<WidthRow> mean_width(std::span<const IntervalSet> intervals,
                                 std::span<const double> values,
                                 const Grouping& grouping) {
  if (intervals.size() != values.size())
    throw Error(ErrorCode::shape_mismatch, "intervals and values differ in length");
  const auto breaks = grouping.resolve(values);
  std::vector<WidthRow> rows;
  for (const auto& label : grouping.labels())
    rows.push_back({label, kInf, -kInf, 0, 0.0, 0});
  std::vector<std::size_t> finite(rows.size(), 0);
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    auto& row = rows[Grouping::assign(values[i], breaks)];
    auto& count = finite[static_cast<std::size_t>(&row - rows.data())];
    ++row.n;
    row.lower = std::min(row.lower, values[i]);
    row.upper = std::max(row.upper, values[i]);
    const double w = intervals[i].total_width();
    if (std::isfinite(w)) {
      row.mean_width += w;
      ++count;
    } else {
      ++row.inf_width_count;
    }
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    rows[g].mean_width = finite[g] == 0 ? std::numeric_limits<double>::quiet_NaN()
                                        : rows[g].mean_width / static_cast<double>(finite[g]);
    if (rows[g].n == 0) rows[g].lower = rows[g].upper = std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Method and bin specs

namespace {

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::scp, "scp"},
    {Method::bccp_d, "bccp-d"},
    {Method::bccp_c, "bccp-c"},
    {Method::bootstrap, "bootstrap"},
    {Method::bootstrap_log, "bootstrap-log"},
    {Method::lognormal, "lognormal"},
    {Method::poisson, "poisson"},
    {Method::negbinom, "negbinom"},
    {Method::quantreg, "quantreg"},
};

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::invalid_argument, "not a number: '" + std::string(text) + "'");
  return v;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kMethodNames)
    if (method == m) return name;
  return "scp";
}

Method parse_method(std::string_view name) {
  for (const auto& [method, text] : kMethodNames)
    if (text == name) return method;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(name) + "'");
}

BinSpec BinSpec::parse(std::string_view text) {
  BinSpec spec;
  if (text.empty() || text == "none") return spec;
  constexpr std::string_view prefix = "percentiles:";
  if (text.starts_with(prefix)) {
    spec.kind = Kind::percentiles;
    const double k = parse_number(text.substr(prefix.size()));
    if (k < 2 || k != std::floor(k))
      throw Error(ErrorCode::invalid_argument, "percentile bins need an integer k >= 2");
    spec.k = static_cast<std::size_t>(k);
    return spec;
  }
  spec.kind = Kind::cutpoints;
  while (!text.empty()) {
    const auto comma = text.find(',');
    spec.cutpoints.push_back(parse_number(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  for (std::size_t i = 1; i < spec.cutpoints.size(); ++i)
    if (!(spec.cutpoints[i] > spec.cutpoints[i - 1]))
      throw Error(ErrorCode::invalid_cutpoints, "cutpoints must be strictly increasing");
  return spec;
}

std::string BinSpec::to_string() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::percentiles: return "percentiles:" + std::to_string(k);
    case Kind::cutpoints: {
      std::string out;
      for (std::size_t i = 0; i < cutpoints.size(); ++i) {
        if (i) out += ',';
        out += format_number(cutpoints[i]);
      }
      return out;
    }
  }
  return "none";
}

BinPartition BinSpec::build(std::span<const double> calibration_y, double support_min) const {
  switch (kind) {
    case Kind::none: return BinPartition::whole(support_min);
    case Kind::percentiles: return bins_from_percentiles(calibration_y, k, support_min);
    case Kind::cutpoints: return bins_from_cutpoints(cutpoints, support_min);
  }
  return BinPartition::whole(support_min);
}

MethodSpec MethodSpec::parse(std::string_view text) {
  MethodSpec spec;
  const auto eq = text.find('=');
  spec.method = parse_method(text.substr(0, eq));
  if (eq != std::string_view::npos) spec.bins = BinSpec::parse(text.substr(eq + 1));
  if (is_bin_conditional(spec.method) && spec.bins.kind == BinSpec::Kind::none)
    throw Error(ErrorCode::invalid_argument,
                std::string(method_name(spec.method)) + " requires bins");
  if (!is_bin_conditional(spec.method) && spec.bins.kind != BinSpec::Kind::none)
    throw Error(ErrorCode::invalid_argument,
                std::string(method_name(spec.method)) + " does not take bins");
  return spec;
}

std::string MethodSpec::display_label() const {
  if (!label.empty()) return label;
  std::string out(method_name(method));
  if (bins.kind != BinSpec::Kind::none) out += "(" + bins.to_string() + ")";
  return out;
}

std::string_view dgp_name(Dgp d) { return d == Dgp::lognormal ? "lognormal" : "zicount"; }

Dgp parse_dgp(std::string_view name) {
  if (name == "lognormal") return Dgp::lognormal;
  if (name == "zicount") return Dgp::zicount;
  throw Error(ErrorCode::invalid_argument, "unknown dgp '" + std::string(name) + "'");
}

StudyConfig StudyConfig::lognormal_study() {
  StudyConfig c;
  c.methods = {
      MethodSpec::parse("scp"),
      MethodSpec::parse("bccp-d=percentiles:2"),
      MethodSpec::parse("bccp-d=percentiles:4"),
      MethodSpec::parse("bccp-d=percentiles:6"),
      MethodSpec::parse("bccp-c=percentiles:2"),
      MethodSpec::parse("bccp-c=percentiles:4"),
      MethodSpec::parse("bccp-c=percentiles:6"),
      MethodSpec::parse("bootstrap"),
      MethodSpec::parse("bootstrap-log"),
      MethodSpec::parse("lognormal"),
      MethodSpec::parse("quantreg"),
  };
  return c;
}

StudyConfig StudyConfig::count_study() {
  StudyConfig c;
  c.dgp = Dgp::zicount;
  c.n = 20'000;
  c.split = {0.7, 0.2, 0.1};
  c.model_transform = OutcomeTransform(OutcomeTransform::Kind::log1p);
  c.score_transform = OutcomeTransform(OutcomeTransform::Kind::log1p);
  c.grouping = Grouping::bins(bins_from_cutpoints(std::vector<double>{1.0}, 0.0),
                              {"zeros", "non-zeros"});
  c.replications = 50;
  c.methods = {
      MethodSpec::parse("scp"),
      MethodSpec::parse("bccp-d=1"),
      MethodSpec::parse("bccp-d=1,8,55"),
      MethodSpec::parse("bccp-d=1,3,8,21,55,149"),
      MethodSpec::parse("bootstrap-log"),
      MethodSpec::parse("bootstrap"),
      MethodSpec::parse("lognormal"),
      MethodSpec::parse("negbinom"),
      MethodSpec::parse("poisson"),
      MethodSpec::parse("quantreg"),
  };
  return c;
}

// ---------------------------------------------------------------------------
// Replicates

namespace {

struct ReplicateData {
  Matrix train_x, test_x;
  std::vector<double> train_y, calib_y, test_y;
  std::vector<double> calib_pred, test_pred;  // raw units
};

ReplicateData prepare(const StudyConfig& config, std::size_t replicate) {
  const auto data_seed = derive_seed(config.seed, replicate, "data");
  Dataset data = config.dgp == Dgp::lognormal
                     ? lognormal_dgp(config.n, data_seed, config.lognormal_sigma)
                     : zero_inflated_count_dgp(config.n, data_seed, config.count);
  split(data, config.split, derive_seed(config.seed, replicate, "split"));

  ReplicateData rd;
  rd.train_x = data.features_of(Split::train);
  rd.test_x = data.features_of(Split::test);
  rd.train_y = data.y_of(Split::train);
  rd.calib_y = data.y_of(Split::calibration);
  rd.test_y = data.y_of(Split::test);
  const auto model = ols_fit(rd.train_x, rd.train_y, config.model_transform);
  rd.calib_pred = predict_rows(model, data.features_of(Split::calibration)).raw;
  rd.test_pred = predict_rows(model, rd.test_x).raw;
  return rd;
}

std::vector<IntervalSet> build_intervals(const StudyConfig& config, const MethodSpec& spec,
                                         const ReplicateData& rd, std::size_t replicate) {
  const double alpha = config.alpha;
  const double support = config.support_min;
  const auto model_t = config.model_transform;
  std::vector<IntervalSet> out;
  out.reserve(rd.test_pred.size());
  auto clip = [support](PredictionInterval iv) {
    iv.lower = std::max(iv.lower, support);
    iv.upper = std::max(iv.upper, iv.lower);
    return iv;
  };
  auto on_model_scale = [&](double raw) { return model_t.forward(std::max(raw, support)); };

  switch (spec.method) {
    case Method::scp:
    case Method::bccp_d:
    case Method::bccp_c: {
      const auto partition = spec.bins.build(rd.calib_y, support);
      const ConformalCalibration calib(rd.calib_y, rd.calib_pred, alpha, partition,
                                       {config.score_transform, config.allow_empty_bins});
      for (double y_hat : rd.test_pred) {
        if (spec.method == Method::scp) out.emplace_back(scp_interval(y_hat, calib).interval);
        else if (spec.method == Method::bccp_d) out.push_back(bccp_discontiguous(y_hat, calib).set);
        else out.emplace_back(bccp_contiguous(y_hat, calib).interval);
      }
      break;
    }
    case Method::bootstrap:
    case Method::bootstrap_log: {
      const bool log_scale = spec.method == Method::bootstrap_log;
      const auto scale = log_scale ? model_t : OutcomeTransform{};
      const auto pool = ResidualPool::from_calibration(rd.calib_y, rd.calib_pred, scale,
                                                       config.residual_sign);
      const ResidualBootstrap boot(
          pool, config.bootstrap_draws,
          derive_seed(config.seed, replicate, "bootstrap:" + spec.display_label()));
      for (double y_hat : rd.test_pred)
        out.emplace_back(boot.interval(log_scale ? on_model_scale(y_hat) : y_hat, alpha, support));
      break;
    }
    case Method::lognormal: {
      const double sigma = residual_sd(rd.calib_y, rd.calib_pred, model_t);
      for (double y_hat : rd.test_pred)
        out.emplace_back(clip(lognormal_interval(on_model_scale(y_hat), sigma, alpha, model_t)));
      break;
    }
    case Method::poisson:
      for (double y_hat : rd.test_pred)
        out.emplace_back(poisson_interval(std::max(y_hat, 0.0), alpha));
      break;
    case Method::negbinom: {
      const auto fit = estimate_nb_dispersion(rd.calib_y, rd.calib_pred);
      for (double y_hat : rd.test_pred)
        out.emplace_back(count_interval(std::max(y_hat, 0.0), fit, alpha).interval);
      break;
    }
    case Method::quantreg: {
      const auto qr = quantreg_fit_interval(rd.train_x, rd.train_y, alpha, model_t);
      std::vector<double> x(static_cast<std::size_t>(rd.test_x.cols()));
      for (Eigen::Index i = 0; i < rd.test_x.rows(); ++i) {
        for (Eigen::Index j = 0; j < rd.test_x.cols(); ++j)
          x[static_cast<std::size_t>(j)] = rd.test_x(i, j);
        out.emplace_back(clip(quantreg_interval(qr, x).interval));
      }
      break;
    }
  }
  if (config.round_counts)
    for (auto& set : out) set = round_count_set(set);
  return out;
}

}  // namespace

ReplicateResult run_replicate(const StudyConfig& config, std::size_t replicate) {
  if (config.methods.empty())
    throw Error(ErrorCode::invalid_argument, "no methods configured");
  const auto rd = prepare(config, replicate);
  const auto width_grouping = Grouping::quantiles(std::max<std::size_t>(config.width_groups, 1));
  ReplicateResult result;
  for (const auto& spec : config.methods) {
    const auto sets = build_intervals(config, spec, rd, replicate);
    const auto table = coverage(sets, rd.test_y, config.grouping);
    const auto widths = summarize(sets, rd.test_y, rd.test_pred, width_grouping);
    MethodReplicate mr;
    mr.groups.push_back(table.overall);
    mr.groups.insert(mr.groups.end(), table.groups.begin(), table.groups.end());
    mr.width_groups = widths.groups;
    result.methods.push_back(std::move(mr));
  }
  return result;
}

const ReportRow& ReplicationReport::row(std::string_view method, std::string_view group) const {
  for (const auto& r : rows)
    if (r.method == method && r.group == group) return r;
  throw Error(ErrorCode::invalid_argument,
              "no report row for " + std::string(method) + " / " + std::string(group));
}

std::vector<ReportRow> report_rows(std::string_view method, const CoverageTable& table) {
  std::vector<ReportRow> rows;
  auto make = [&](const GroupStats& g) {
    return ReportRow{std::string(method), g.group,        g.n,
                     g.coverage(),        g.binomial_se(), g.mean_width(),
                     std::numeric_limits<double>::quiet_NaN(), g.inf_width_count,
                     g.discontiguity_rate()};
  };
  rows.push_back(make(table.overall));
  for (const auto& g : table.groups) rows.push_back(make(g));
  return rows;
}

namespace {

double replicate_se(const std::vector<double>& values) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return sd / std::sqrt(static_cast<double>(values.size()));
}

ReportRow pooled_row(const std::string& method, std::span<const GroupStats> per_replicate) {
  GroupStats pooled;
  pooled.group = per_replicate.empty() ? std::string() : per_replicate.front().group;
  std::vector<double> cov, width;
  for (const auto& g : per_replicate) {
    pooled.merge(g);
    if (g.n > 0) cov.push_back(g.coverage());
    if (g.finite_width_count > 0) width.push_back(g.mean_width());
  }
  ReportRow row{method,           pooled.group,          pooled.n,
                pooled.coverage(), replicate_se(cov),    pooled.mean_width(),
                replicate_se(width), pooled.inf_width_count, pooled.discontiguity_rate()};
  if (std::isnan(row.coverage_se)) row.coverage_se = pooled.binomial_se();
  return row;
}

}  // namespace

ReplicationReport aggregate(const StudyConfig& config,
                            std::span<const ReplicateResult> replicates) {
  ReplicationReport report;
  report.replications = replicates.size();
  if (replicates.empty()) return report;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const auto label = config.methods[m].display_label();
    const auto& first = replicates.front().methods.at(m);
    for (std::size_t g = 0; g < first.groups.size(); ++g) {
      std::vector<GroupStats> column;
      for (const auto& rep : replicates) column.push_back(rep.methods.at(m).groups.at(g));
      report.rows.push_back(pooled_row(label, column));
    }
    for (std::size_t g = 0; g < first.width_groups.size(); ++g) {
      std::vector<GroupStats> column;
      for (const auto& rep : replicates) column.push_back(rep.methods.at(m).width_groups.at(g));
      report.width_rows.push_back(pooled_row(label, column));
    }
  }
  return report;
}

ReplicationReport run_replications(const StudyConfig& config) {
  if (config.replications == 0)
    throw Error(ErrorCode::invalid_argument, "replications must be positive");
  const std::size_t total = config.replications;
  std::vector<ReplicateResult> results(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < total; r = next++) {
      try {
        results[r] = run_replicate(config, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t r = 0; r < total; ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(r) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::invalid_argument,
                  "replicate " + std::to_string(r) + ": " + e.what());
    }
  }
  return aggregate(config, results);
}

}  // namespace bccp
