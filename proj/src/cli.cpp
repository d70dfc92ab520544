#include "bccp/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bccp/baselines.hpp"
#include "bccp/conformal.hpp"
#include "bccp/csv.hpp"
#include "bccp/evaluation.hpp"
#include "bccp/models.hpp"
#include "bccp/rng.hpp"
#include "bccp/simulation.hpp"

namespace bccp::cli {

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::config: return exit_config;
    case ErrorCategory::data: return exit_data;
    case ErrorCategory::numerical: return exit_numerical;
  }
  return exit_numerical;
}

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::invalid_argument, message);
}

bool is_stdout(const std::string& path) { return path.empty() || path == "-"; }

// The body is rendered in memory first so a failing command leaves no
// partial file behind.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& body) {
  std::ostringstream buffer;
  body(buffer);
  if (is_stdout(path)) {
    fallback << buffer.str();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::io_failure, "cannot write '" + path + "'");
  file << buffer.str();
  file.close();
  if (!file) throw Error(ErrorCode::io_failure, "failed writing '" + path + "'");
}

void emit_meta(const std::string& path, const json& meta) {
  if (is_stdout(path)) return;
  std::ofstream file(path + ".meta.json", std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::io_failure, "cannot write '" + path + ".meta.json'");
  file << meta.dump(2) << '\n';
}

double parse_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) config_error("--alpha must lie in (0, 1)");
  return alpha;
}

double parse_config_real(const std::string& text, const std::string& flag) {
  try {
    return parse_real(text);
  } catch (const Error&) {
    config_error(flag + ": not a number: '" + text + "'");
  }
}

// Support defaults to 0 on the log scales and is unbounded otherwise.
double resolve_support(const std::string& text, OutcomeTransform t) {
  if (!text.empty()) return parse_config_real(text, "--support-min");
  return t.kind() == OutcomeTransform::Kind::identity ? -kInf : 0.0;
}

SplitProportions parse_split_flag(const std::string& text) {
  std::vector<double> parts;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    parts.push_back(parse_config_real(std::string(rest.substr(0, comma)), "--split"));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (parts.size() != 3) config_error("--split takes train,calibration,test proportions");
  return {parts[0], parts[1], parts[2]};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    out.emplace_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

// "quartiles", "percentiles:k", or comma-separated cutpoints.
Grouping parse_grouping(const std::string& text, const std::string& labels,
                        double support_min) {
  if (text == "quartiles") return Grouping::quartiles();
  const auto spec = BinSpec::parse(text);
  if (spec.kind == BinSpec::Kind::percentiles) return Grouping::quantiles(spec.k);
  if (spec.kind == BinSpec::Kind::none) config_error("--groups needs a grouping");
  auto names = split_list(labels);
  if (!names.empty() && names.size() != spec.cutpoints.size() + 1)
    config_error("--group-labels needs one label per group");
  return Grouping::bins(bins_from_cutpoints(spec.cutpoints, support_min), std::move(names));
}

ResidualSign parse_residual_sign(const std::string& text) {
  if (text == "pred-minus-true") return ResidualSign::prediction_minus_truth;
  if (text == "true-minus-pred") return ResidualSign::truth_minus_prediction;
  config_error("--residual-sign must be pred-minus-true or true-minus-pred");
}

std::string residual_sign_name(ResidualSign s) {
  return s == ResidualSign::prediction_minus_truth ? "pred-minus-true" : "true-minus-pred";
}

json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string dgp = "lognormal";
  std::size_t n = 10'000;
  std::uint64_t seed = 1;
  double zero_prob = 0.867;
  double sigma = 0.5;
  std::string split;
  std::string transform;
  std::string out, calib_out, test_out;
  CLI::Option* zero_prob_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const Dgp dgp = parse_dgp(a.dgp);
  if (dgp == Dgp::lognormal && a.zero_prob_opt->count())
    config_error("--zero-prob only applies to --dgp zicount");
  if (!(a.zero_prob >= 0.0 && a.zero_prob <= 1.0)) config_error("--zero-prob must lie in [0, 1]");
  if (!(a.sigma > 0.0)) config_error("--sigma must be positive");
  const auto props = a.split.empty()
                         ? (dgp == Dgp::lognormal ? SplitProportions{0.5, 0.25, 0.25}
                                                  : SplitProportions{0.7, 0.2, 0.1})
                         : parse_split_flag(a.split);
  if ((!a.calib_out.empty() || !a.test_out.empty()) && is_stdout(a.out) &&
      (is_stdout(a.calib_out) || is_stdout(a.test_out)))
    config_error("only one output may go to stdout");

  Dataset data;
  const auto data_seed = derive_seed(a.seed, 0, "data");
  if (dgp == Dgp::lognormal) {
    data = lognormal_dgp(a.n, data_seed, a.sigma);
  } else {
    CountDgpParams params;
    params.zero_prob = a.zero_prob;
    if (a.sigma_opt->count()) params.s = a.sigma;
    data = zero_inflated_count_dgp(a.n, data_seed, params);
  }
  split(data, props, derive_seed(a.seed, 0, "split"));

  std::vector<CalibrationRecord> calib;
  std::vector<TestRecord> test;
  if (!a.calib_out.empty() || !a.test_out.empty()) {
    const auto t = a.transform.empty()
                       ? OutcomeTransform(dgp == Dgp::lognormal ? OutcomeTransform::Kind::log
                                                                : OutcomeTransform::Kind::log1p)
                       : OutcomeTransform::parse(a.transform);
    const auto model = ols_fit(data.features_of(Split::train), data.y_of(Split::train), t);
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.split[i] == Split::train) continue;
      const auto row = data.features.row(static_cast<Eigen::Index>(i));
      const std::vector<double> x(row.begin(), row.end());
      const double pred = predict(model, x).raw;
      if (data.split[i] == Split::calibration)
        calib.push_back({std::to_string(i), data.y[i], pred});
      else
        test.push_back({std::to_string(i), pred, data.y[i]});
    }
  }

  emit(a.out, out, [&](std::ostream& s) { write_dataset(s, data); });
  if (!a.calib_out.empty())
    emit(a.calib_out, out, [&](std::ostream& s) { write_calibration(s, calib); });
  if (!a.test_out.empty())
    emit(a.test_out, out, [&](std::ostream& s) { write_test(s, test); });
}

// ---------------------------------------------------------------------------
// intervals

struct IntervalsArgs {
  std::string calib, test, method, bins;
  double alpha = 0.1;
  std::string transform = "identity";
  std::string support_min;
  bool round_counts = false;
  bool allow_empty_bins = false;
  std::size_t bootstrap_b = 2000;
  std::uint64_t seed = 1;
  std::size_t grid_resolution = 4001;
  bool oracle_check = false;
  std::string residual_sign = "pred-minus-true";
  std::string out;
};

void cmd_intervals(const IntervalsArgs& a, std::ostream& out, std::ostream& err) {
  const auto spec = MethodSpec::parse(a.bins.empty() ? a.method : a.method + "=" + a.bins);
  const double alpha = parse_alpha(a.alpha);
  const auto t = OutcomeTransform::parse(a.transform);
  const double support = resolve_support(a.support_min, t);
  const auto sign = parse_residual_sign(a.residual_sign);
  const bool log_scale = t.kind() != OutcomeTransform::Kind::identity;
  if ((spec.method == Method::bootstrap_log || spec.method == Method::lognormal) && !log_scale)
    config_error(std::string(method_name(spec.method)) + " needs --transform log or log1p");
  if (a.grid_resolution < 2) config_error("--grid-resolution must be at least 2");
  if (a.oracle_check && is_bin_conditional(spec.method) && spec.method != Method::bccp_d)
    config_error("--oracle-check applies to scp and bccp-d");

  const auto calib_records = parse_calibration(read_csv_file(a.calib));
  const auto test_records = parse_test(read_csv_file(a.test));
  if (calib_records.empty())
    throw Error(ErrorCode::empty_calibration, "calibration file has no rows");
  if (test_records.empty()) throw Error(ErrorCode::shape_mismatch, "test file has no rows");

  std::vector<double> y_true, y_pred, test_pred;
  for (const auto& r : calib_records) {
    y_true.push_back(r.y_true);
    y_pred.push_back(r.y_pred);
  }
  for (const auto& r : test_records) test_pred.push_back(r.y_pred);

  auto on_scale = [&](double raw) { return t.forward(std::max(raw, support)); };
  auto clip = [support](PredictionInterval iv) {
    iv.lower = std::max(iv.lower, support);
    iv.upper = std::max(iv.upper, iv.lower);
    return iv;
  };

  std::vector<FlaggedSet> sets;
  sets.reserve(test_pred.size());
  std::size_t mismatches = 0;
  switch (spec.method) {
    case Method::scp:
    case Method::bccp_d:
    case Method::bccp_c: {
      const ConformalCalibration calib(y_true, y_pred, alpha, spec.bins.build(y_true, support),
                                       CalibrationOptions{t, a.allow_empty_bins});
      std::vector<double> grid;
      if (a.oracle_check) grid = default_grid(calib, a.grid_resolution);
      for (double y_hat : test_pred) {
        FlaggedSet fs;
        if (spec.method == Method::scp) {
          auto fi = scp_interval(y_hat, calib);
          fs = {IntervalSet(fi.interval), fi.flags};
        } else if (spec.method == Method::bccp_d) {
          fs = bccp_discontiguous(y_hat, calib);
        } else {
          auto fi = bccp_contiguous(y_hat, calib);
          fs = {IntervalSet(fi.interval), fi.flags};
        }
        if (a.oracle_check) {
          const bool ok = spec.method == Method::scp ? scp_matches_grid(y_hat, calib, grid)
                                                     : bccp_matches_grid(y_hat, calib, grid);
          if (!ok) {
            fs.flags.set(Flag::grid_mismatch);
            ++mismatches;
          }
        }
        sets.push_back(std::move(fs));
      }
      break;
    }
    case Method::bootstrap:
    case Method::bootstrap_log: {
      const bool on_log = spec.method == Method::bootstrap_log;
      const auto scale = on_log ? t : OutcomeTransform{};
      const auto pool = ResidualPool::from_calibration(y_true, y_pred, scale, sign);
      const ResidualBootstrap boot(pool, a.bootstrap_b, derive_seed(a.seed, 0, "bootstrap"));
      for (double y_hat : test_pred)
        sets.push_back({IntervalSet(boot.interval(on_log ? on_scale(y_hat) : y_hat, alpha, support)), {}});
      break;
    }
    case Method::lognormal: {
      const double sigma = residual_sd(y_true, y_pred, t);
      for (double y_hat : test_pred)
        sets.push_back({IntervalSet(clip(lognormal_interval(on_scale(y_hat), sigma, alpha, t))), {}});
      break;
    }
    case Method::poisson:
      for (double y_hat : test_pred)
        sets.push_back({IntervalSet(poisson_interval(std::max(y_hat, 0.0), alpha)), {}});
      break;
    case Method::negbinom: {
      const auto fit = estimate_nb_dispersion(y_true, y_pred);
      for (double y_hat : test_pred) {
        const auto fi = count_interval(std::max(y_hat, 0.0), fit, alpha);
        sets.push_back({IntervalSet(fi.interval), fi.flags});
      }
      break;
    }
    case Method::quantreg: {
      // Only predictions are available here, so the quantile model is
      // T(y) on T(y_hat) fitted over the calibration file.
      Matrix features(static_cast<Eigen::Index>(y_pred.size()), 1);
      for (std::size_t i = 0; i < y_pred.size(); ++i)
        features(static_cast<Eigen::Index>(i), 0) = on_scale(y_pred[i]);
      const auto model = quantreg_fit_interval(features, y_true, alpha, t);
      for (double y_hat : test_pred) {
        const double x = on_scale(y_hat);
        const auto fi = quantreg_interval(model, std::span<const double>(&x, 1));
        sets.push_back({IntervalSet(clip(fi.interval)), fi.flags});
      }
      break;
    }
  }
  if (a.round_counts) {
    for (auto& fs : sets) {
      fs.set = round_count_set(fs.set);
      fs.flags.set(Flag::rounded);
    }
  }
  if (a.oracle_check)
    err << "oracle check: " << mismatches << " of " << sets.size()
        << " rows differ from the grid search\n";

  std::vector<IntervalRecord> records;
  records.reserve(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i)
    records.push_back({test_records[i].row_id, std::move(sets[i].set), sets[i].flags});
  emit(a.out, out, [&](std::ostream& s) { write_intervals(s, records); });
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::vector<std::string> intervals;
  std::string test;
  std::string groups = "quartiles";
  std::string group_labels;
  std::string support_min;
  std::string width_by = "y";
  std::size_t width_groups = 10;
  std::string out, width_out, points_out;
};

struct LabelledFile {
  std::string label, path;
};

LabelledFile parse_labelled(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    return {std::filesystem::path(text).stem().string(), text};
  if (eq == 0 || eq + 1 == text.size()) config_error("--intervals expects label=path");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.width_by != "y" && a.width_by != "y_hat") config_error("--width-by must be y or y_hat");
  if (a.width_groups == 0) config_error("--width-groups must be positive");
  const double support = a.support_min.empty() ? -kInf
                                               : parse_config_real(a.support_min, "--support-min");
  const auto grouping = parse_grouping(a.groups, a.group_labels, support);
  std::vector<LabelledFile> files;
  for (const auto& text : a.intervals) files.push_back(parse_labelled(text));
  const int outputs_on_stdout = static_cast<int>(is_stdout(a.out)) +
                                static_cast<int>(!a.width_out.empty() && is_stdout(a.width_out)) +
                                static_cast<int>(!a.points_out.empty() && is_stdout(a.points_out));
  if (outputs_on_stdout > 1) config_error("only one output may go to stdout");

  const auto test = parse_test(read_csv_file(a.test));
  if (test.empty()) throw Error(ErrorCode::shape_mismatch, "test file has no rows");
  std::vector<double> y, y_hat;
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].y_true)
      throw Error(ErrorCode::shape_mismatch, "test row " + test[i].row_id + " has no y_true");
    if (!position.emplace(test[i].row_id, i).second)
      throw Error(ErrorCode::shape_mismatch, "duplicate test row_id " + test[i].row_id);
    y.push_back(*test[i].y_true);
    y_hat.push_back(test[i].y_pred);
  }

  std::vector<ReportRow> rows;
  std::ostringstream width_csv, points_csv;
  width_csv << "method,group,lower,upper,n,mean_width,inf_width_count\n";
  points_csv << "method,row_id,y_true,y_pred,covered,width,segments\n";
  const auto width_grouping = Grouping::quantiles(a.width_groups);
  const auto& width_values = a.width_by == "y" ? y : y_hat;

  for (const auto& f : files) {
    const auto records = parse_intervals(read_csv_file(f.path));
    if (records.size() != test.size())
      throw Error(ErrorCode::shape_mismatch,
                  f.path + ": " + std::to_string(records.size()) + " interval rows for " +
                      std::to_string(test.size()) + " test rows");
    std::vector<IntervalSet> sets(test.size());
    std::vector<bool> seen(test.size(), false);
    for (const auto& r : records) {
      const auto it = position.find(r.row_id);
      if (it == position.end() || seen[it->second])
        throw Error(ErrorCode::shape_mismatch, f.path + ": row_id " + r.row_id +
                                                   " does not match the test file");
      seen[it->second] = true;
      sets[it->second] = r.set;
    }
    const auto table = coverage(sets, y, grouping);
    const auto part = report_rows(f.label, table);
    rows.insert(rows.end(), part.begin(), part.end());
    for (const auto& w : mean_width(sets, width_values, width_grouping)) {
      width_csv << f.label << ',' << w.group << ',' << format_real(w.lower) << ','
                << format_real(w.upper) << ',' << w.n << ',' << format_real(w.mean_width) << ','
                << w.inf_width_count << '\n';
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      points_csv << f.label << ',' << test[i].row_id << ',' << format_real(y[i]) << ','
                 << format_real(y_hat[i]) << ',' << (sets[i].contains(y[i]) ? 1 : 0) << ','
                 << format_real(sets[i].total_width()) << ',' << sets[i].size() << '\n';
    }
  }

  emit(a.out, out, [&](std::ostream& s) { write_report(s, rows); });
  if (!a.width_out.empty()) emit(a.width_out, out, [&](std::ostream& s) { s << width_csv.str(); });
  if (!a.points_out.empty())
    emit(a.points_out, out, [&](std::ostream& s) { s << points_csv.str(); });

  json meta;
  meta["command"] = "evaluate";
  json inputs = json::array();
  for (const auto& f : files) inputs.push_back({{"label", f.label}, {"path", f.path}});
  meta["intervals"] = inputs;
  meta["test"] = a.test;
  meta["test_rows"] = test.size();
  meta["groups"] = grouping.describe();
  meta["support_min"] = real_json(support);
  meta["width_by"] = a.width_by;
  meta["width_groups"] = a.width_groups;
  emit_meta(a.out, meta);
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string study = "lognormal";
  std::string dgp;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 1;
  double alpha = 0.1;
  std::vector<std::string> methods;
  std::string groups, group_labels;
  std::string transform, score_transform, support_min;
  double zero_prob = 0.867;
  double sigma = 0.5;
  std::size_t bootstrap_b = 2000;
  bool round_counts = false;
  bool allow_empty_bins = false;
  unsigned threads = 0;
  std::string split;
  std::string residual_sign;
  std::size_t width_groups = 10;
  std::string out, width_out;
  CLI::App* app = nullptr;
};

bool given(const CLI::App* app, const std::string& flag) { return app->count(flag) > 0; }

StudyConfig resolve_study(const ReportArgs& a) {
  StudyConfig c;
  if (a.study == "lognormal") c = StudyConfig::lognormal_study();
  else if (a.study == "count") c = StudyConfig::count_study();
  else config_error("--study must be lognormal or count");

  if (!a.dgp.empty()) {
    const Dgp d = parse_dgp(a.dgp);
    if (d != c.dgp) {
      // Switching generators without a matching study keeps the methods but
      // takes the other study's data-dependent defaults.
      const auto other = d == Dgp::lognormal ? StudyConfig::lognormal_study()
                                             : StudyConfig::count_study();
      c.dgp = d;
      c.n = other.n;
      c.split = other.split;
      c.model_transform = other.model_transform;
      c.score_transform = other.score_transform;
      c.grouping = other.grouping;
    }
  }
  const auto* app = a.app;
  if (given(app, "--zero-prob")) {
    if (c.dgp != Dgp::zicount) config_error("--zero-prob only applies to the zicount generator");
    if (!(a.zero_prob >= 0.0 && a.zero_prob <= 1.0)) config_error("--zero-prob must lie in [0, 1]");
    c.count.zero_prob = a.zero_prob;
  }
  if (given(app, "--sigma")) {
    if (!(a.sigma > 0.0)) config_error("--sigma must be positive");
    if (c.dgp == Dgp::lognormal) c.lognormal_sigma = a.sigma;
    else c.count.s = a.sigma;
  }
  if (given(app, "--n")) c.n = a.n;
  if (given(app, "--reps")) {
    if (a.reps == 0) config_error("--reps must be positive");
    c.replications = a.reps;
  }
  c.seed = a.seed;
  c.alpha = parse_alpha(a.alpha);
  if (!a.methods.empty()) {
    c.methods.clear();
    for (const auto& m : a.methods) c.methods.push_back(MethodSpec::parse(m));
  }
  if (!a.transform.empty()) c.model_transform = OutcomeTransform::parse(a.transform);
  if (!a.score_transform.empty()) c.score_transform = OutcomeTransform::parse(a.score_transform);
  if (!a.support_min.empty()) c.support_min = parse_config_real(a.support_min, "--support-min");
  if (!a.groups.empty()) c.grouping = parse_grouping(a.groups, a.group_labels, c.support_min);
  else if (!a.group_labels.empty()) config_error("--group-labels needs --groups");
  if (!a.split.empty()) c.split = parse_split_flag(a.split);
  if (!a.residual_sign.empty()) c.residual_sign = parse_residual_sign(a.residual_sign);
  if (a.width_groups == 0) config_error("--width-groups must be positive");
  c.width_groups = a.width_groups;
  c.bootstrap_draws = a.bootstrap_b;
  c.round_counts = a.round_counts;
  c.allow_empty_bins = a.allow_empty_bins;
  c.threads = a.threads;
  for (const auto& m : c.methods) {
    const bool needs_log = m.method == Method::bootstrap_log || m.method == Method::lognormal;
    if (needs_log && c.model_transform.kind() == OutcomeTransform::Kind::identity)
      config_error(m.display_label() + " needs a log or log1p model transform");
  }
  return c;
}

json study_json(const StudyConfig& c) {
  json j;
  j["dgp"] = dgp_name(c.dgp);
  j["n"] = c.n;
  if (c.dgp == Dgp::lognormal) {
    j["sigma"] = c.lognormal_sigma;
  } else {
    j["zero_prob"] = c.count.zero_prob;
    j["a"] = c.count.a;
    j["b"] = c.count.b;
    j["s"] = c.count.s;
  }
  j["split"] = {c.split.train, c.split.calibration, c.split.test};
  j["model_transform"] = c.model_transform.name();
  j["score_transform"] = c.score_transform.name();
  j["support_min"] = real_json(c.support_min);
  j["alpha"] = c.alpha;
  json methods = json::array();
  for (const auto& m : c.methods) methods.push_back(m.display_label());
  j["methods"] = methods;
  j["groups"] = c.grouping.describe();
  j["width_groups"] = c.width_groups;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["bootstrap_draws"] = c.bootstrap_draws;
  j["residual_sign"] = residual_sign_name(c.residual_sign);
  j["round_counts"] = c.round_counts;
  j["allow_empty_bins"] = c.allow_empty_bins;
  return j;
}

void cmd_report(const ReportArgs& a, std::ostream& out) {
  if (is_stdout(a.out) && !a.width_out.empty() && is_stdout(a.width_out))
    config_error("only one output may go to stdout");
  const auto config = resolve_study(a);
  const auto report = run_replications(config);
  emit(a.out, out, [&](std::ostream& s) { write_report(s, report.rows); });
  if (!a.width_out.empty())
    emit(a.width_out, out, [&](std::ostream& s) { write_report(s, report.width_rows); });
  json meta;
  meta["command"] = "report";
  meta["study"] = a.study;
  meta["config"] = study_json(config);
  emit_meta(a.out, meta);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Standard and bin-conditional conformal prediction intervals", "bccp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--dgp", sim.dgp, "lognormal | zicount")->capture_default_str();
  simulate->add_option("--n", sim.n, "Rows")->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  sim.zero_prob_opt = simulate->add_option("--zero-prob", sim.zero_prob, "Zero-inflation probability (zicount)");
  sim.sigma_opt = simulate->add_option("--sigma", sim.sigma, "Noise sd on the log scale");
  simulate->add_option("--split", sim.split, "train,calibration,test proportions");
  simulate->add_option("--transform", sim.transform, "Point-model scale for --calib-out/--test-out");
  simulate->add_option("--out", sim.out, "Dataset CSV (default stdout)");
  simulate->add_option("--calib-out", sim.calib_out, "Calibration CSV from an OLS fit on train");
  simulate->add_option("--test-out", sim.test_out, "Test CSV from the same fit");

  IntervalsArgs iv;
  auto* intervals = app.add_subcommand("intervals", "Prediction sets for a test file");
  intervals->add_option("--calib", iv.calib, "row_id,y_true,y_pred")->required();
  intervals->add_option("--test", iv.test, "row_id,y_pred[,y_true]")->required();
  intervals->add_option("--method", iv.method,
                        "scp | bccp-d | bccp-c | bootstrap | bootstrap-log | lognormal | "
                        "poisson | negbinom | quantreg")
      ->required();
  intervals->add_option("--bins", iv.bins, "percentiles:k or comma-separated cutpoints");
  intervals->add_option("--alpha", iv.alpha)->capture_default_str();
  intervals->add_option("--transform", iv.transform, "identity | log | log1p")->capture_default_str();
  intervals->add_option("--support-min", iv.support_min, "Lower end of the outcome support");
  intervals->add_flag("--round-counts", iv.round_counts, "Round bounds to integers");
  intervals->add_flag("--allow-empty-bins", iv.allow_empty_bins);
  intervals->add_option("--bootstrap-b", iv.bootstrap_b)->capture_default_str();
  intervals->add_option("--seed", iv.seed)->capture_default_str();
  intervals->add_option("--grid-resolution", iv.grid_resolution)->capture_default_str();
  intervals->add_flag("--oracle-check", iv.oracle_check, "Compare against a grid search");
  intervals->add_option("--residual-sign", iv.residual_sign)->capture_default_str();
  intervals->add_option("--out", iv.out, "Interval CSV (default stdout)");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Coverage and width of interval files");
  evaluate->add_option("--intervals", ev.intervals, "label=path, repeatable")->required();
  evaluate->add_option("--test", ev.test, "Test CSV with y_true")->required();
  evaluate->add_option("--groups", ev.groups, "quartiles | percentiles:k | cutpoints")
      ->capture_default_str();
  evaluate->add_option("--group-labels", ev.group_labels, "Comma-separated names for cutpoint groups");
  evaluate->add_option("--support-min", ev.support_min);
  evaluate->add_option("--width-by", ev.width_by, "y | y_hat")->capture_default_str();
  evaluate->add_option("--width-groups", ev.width_groups)->capture_default_str();
  evaluate->add_option("--out", ev.out, "Report CSV (default stdout)");
  evaluate->add_option("--width-out", ev.width_out, "Width-by-value CSV");
  evaluate->add_option("--points-out", ev.points_out, "Per-record CSV");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Replicated simulation study");
  rep.app = report;
  report->add_option("--study", rep.study, "lognormal | count")->capture_default_str();
  report->add_option("--dgp", rep.dgp);
  report->add_option("--n", rep.n);
  report->add_option("--reps", rep.reps);
  report->add_option("--seed", rep.seed)->capture_default_str();
  report->add_option("--alpha", rep.alpha)->capture_default_str();
  report->add_option("--methods", rep.methods, "name[=bins], repeatable");
  report->add_option("--groups", rep.groups);
  report->add_option("--group-labels", rep.group_labels);
  report->add_option("--transform", rep.transform, "Point-model scale");
  report->add_option("--score-transform", rep.score_transform, "Conformal score scale");
  report->add_option("--support-min", rep.support_min);
  report->add_option("--zero-prob", rep.zero_prob);
  report->add_option("--sigma", rep.sigma);
  report->add_option("--bootstrap-b", rep.bootstrap_b)->capture_default_str();
  report->add_flag("--round-counts", rep.round_counts);
  report->add_flag("--allow-empty-bins", rep.allow_empty_bins);
  report->add_option("--threads", rep.threads, "0 = hardware concurrency")->capture_default_str();
  report->add_option("--split", rep.split);
  report->add_option("--residual-sign", rep.residual_sign);
  report->add_option("--width-groups", rep.width_groups)->capture_default_str();
  report->add_option("--out", rep.out, "Report CSV (default stdout)");
  report->add_option("--width-out", rep.width_out, "Width rows grouped by y_hat");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*simulate) cmd_simulate(sim, out);
    else if (*intervals) cmd_intervals(iv, out, err);
    else if (*evaluate) cmd_evaluate(ev, out);
    else if (*report) cmd_report(rep, out);
    return exit_ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace bccp::cli
