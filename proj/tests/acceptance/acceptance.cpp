// Acceptance checks. Prints one PASS/FAIL line per criterion, indented
// detail lines beneath it, and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "bccp/baselines.hpp"
#include "bccp/conformal.hpp"
#include "bccp/csv.hpp"
#include "bccp/evaluation.hpp"
#include "bccp/rng.hpp"

using namespace bccp;

namespace {

struct Criterion {
  std::string name;
  bool ok = true;
  std::vector<std::string> details;

  void check(bool pass, const std::string& what) {
    ok = ok && pass;
    details.push_back(std::string(pass ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { details.push_back("info " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(const Criterion& c, double seconds) {
  std::printf("[%s] %s (%.1fs)\n", c.ok ? "PASS" : "FAIL", c.name.c_str(), seconds);
  for (const auto& d : c.details) std::printf("    %s\n", d.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

template <class Fn>
void run(const std::string& name, Fn&& body) {
  Criterion c{name};
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.check(false, std::string("exception: ") + e.what());
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  report(c, dt.count());
}

void near(Criterion& c, const ReplicationReport& r, const std::string& method,
          const std::string& group, double target, double tol) {
  const double v = r.row(method, group).coverage;
  c.check(std::abs(v - target) <= tol,
          fmt("%-24s %-10s coverage %.4f, target %.2f +/- %.2f", method.c_str(), group.c_str(),
              v, target, tol));
}

// ---------------------------------------------------------------------------

ReplicationReport lognormal_report;

void lognormal_study(Criterion& c) {
  auto config = StudyConfig::lognormal_study();
  config.replications = 100;
  lognormal_report = run_replications(config);
  const auto& r = lognormal_report;
  const double tol = 0.03;
  const char* quartiles[] = {"Q1", "Q2", "Q3", "Q4"};
  const double scp[] = {0.99, 0.98, 0.99, 0.64};
  near(c, r, "scp", "all", 0.90, tol);
  for (int q = 0; q < 4; ++q) near(c, r, "scp", quartiles[q], scp[q], tol);
  near(c, r, "bccp-d(percentiles:4)", "all", 0.90, tol);
  for (auto q : quartiles) near(c, r, "bccp-d(percentiles:4)", q, 0.90, tol);
  near(c, r, "bccp-c(percentiles:6)", "all", 0.92, tol);
  near(c, r, "bootstrap", "all", 0.84, tol);
  near(c, r, "bootstrap", "Q4", 0.42, tol);
  for (const char* m : {"lognormal", "quantreg"}) {
    near(c, r, m, "all", 0.90, tol);
    near(c, r, m, "Q1", 0.82, tol);
    near(c, r, m, "Q4", 0.82, tol);
  }
  c.info(fmt("R = %zu replications, n = 10000 split 5000/2500/2500, alpha = 0.1",
             r.replications));
}

void count_study(Criterion& c) {
  auto config = StudyConfig::count_study();
  config.replications = 50;
  const auto r = run_replications(config);
  for (const char* m :
       {"scp", "bootstrap-log", "bootstrap", "lognormal", "negbinom", "poisson", "quantreg"}) {
    const double z = r.row(m, "zeros").coverage, nz = r.row(m, "non-zeros").coverage;
    c.check(z >= 0.97, fmt("%-28s zeros     %.4f >= 0.97", m, z));
    c.check(nz <= 0.70, fmt("%-28s non-zeros %.4f <= 0.70", m, nz));
  }
  for (const char* m : {"bccp-d(1)", "bccp-d(1,8,55)", "bccp-d(1,3,8,21,55,149)"}) {
    for (const char* g : {"zeros", "non-zeros"}) near(c, r, m, g, 0.90, 0.03);
  }
  c.info(fmt("R = %zu, n = 20000 split 70/20/10, log1p model and scores, bounds unrounded",
             r.replications));

  auto rounded = config;
  rounded.round_counts = true;
  rounded.methods = {MethodSpec::parse("bccp-d=1"), MethodSpec::parse("bccp-d=1,8,55"),
                     MethodSpec::parse("bccp-d=1,3,8,21,55,149")};
  const auto rr = run_replications(rounded);
  for (const auto& m : rounded.methods) {
    const auto label = m.display_label();
    c.info(fmt("with integer rounding: %-24s zeros %.4f  non-zeros %.4f", label.c_str(),
               rr.row(label, "zeros").coverage, rr.row(label, "non-zeros").coverage));
  }
}

// Exchangeable data with a fixed oracle point model, so only calibration
// randomness matters.
void guarantee(Criterion& c) {
  const std::size_t reps = 1000, n_calib = 100, n_test = 100;
  const std::vector<double> cuts{2.0, 4.0};
  const auto partition = bins_from_cutpoints(cuts, 0.0);
  for (double alpha : {0.1, 0.2, 0.5}) {
    std::vector<double> scp_cov;
    std::vector<std::vector<double>> bin_cov(3);
    std::vector<double> bin_bound(3, 0.0);
    std::vector<std::size_t> bin_reps(3, 0);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      Rng rng(derive_seed(2024, rep, "guarantee:" + std::to_string(alpha)));
      auto draw = [&rng](double& y, double& yh) {
        const double mu = rng.uniform() + rng.uniform();
        yh = std::exp(mu);
        y = std::exp(rng.normal(mu, 0.5));
      };
      std::vector<double> y(n_calib), yh(n_calib);
      for (std::size_t i = 0; i < n_calib; ++i) draw(y[i], yh[i]);
      const ConformalCalibration calib(y, yh, alpha, partition,
                                       CalibrationOptions{{}, true});
      std::size_t covered = 0;
      std::vector<std::size_t> bn(3, 0), bc(3, 0);
      for (std::size_t i = 0; i < n_test; ++i) {
        double yt, yht;
        draw(yt, yht);
        covered += scp_interval(yht, calib).interval.contains(yt);
        const auto b = partition.assign(yt);
        ++bn[b];
        bc[b] += bccp_discontiguous(yht, calib).set.contains(yt);
      }
      scp_cov.push_back(static_cast<double>(covered) / n_test);
      for (std::size_t b = 0; b < 3; ++b) {
        if (bn[b] == 0) continue;
        bin_cov[b].push_back(static_cast<double>(bc[b]) / bn[b]);
        bin_bound[b] += 1.0 / (calib.bin_scores(b).size() + 1.0);
        ++bin_reps[b];
      }
    }
    auto mean_se = [](const std::vector<double>& v) {
      double m = 0, ss = 0;
      for (double x : v) m += x;
      m /= v.size();
      for (double x : v) ss += (x - m) * (x - m);
      return std::pair{m, std::sqrt(ss / (v.size() - 1)) / std::sqrt(double(v.size()))};
    };
    const auto [m, se] = mean_se(scp_cov);
    const double lo = 1 - alpha, hi = 1 - alpha + 1.0 / (n_calib + 1);
    c.check(m >= lo - 3 * se && m <= hi + 3 * se,
            fmt("alpha %.1f scp       coverage %.4f in [%.4f, %.4f] +/- 3 x %.4f", alpha, m, lo,
                hi, se));
    for (std::size_t b = 0; b < 3; ++b) {
      const auto [bm, bse] = mean_se(bin_cov[b]);
      // The upper end uses the replicate average of 1/(n_b + 1), since the
      // number of calibration records per bin varies.
      const double bhi = 1 - alpha + bin_bound[b] / bin_reps[b];
      c.check(bm >= lo - 3 * bse && bm <= bhi + 3 * bse,
              fmt("alpha %.1f bccp bin%zu coverage %.4f in [%.4f, %.4f] +/- 3 x %.4f", alpha,
                  b + 1, bm, lo, bhi, bse));
    }
  }
  c.info(fmt("%zu replicates, n_calib = %zu, n_test = %zu, bins [0,2) [2,4) [4,inf)", reps,
             n_calib, n_test));
}

// Grid hull agreement on grid points inside [range_lo, range_hi).
bool hull_agrees(const FlaggedSet& found, std::optional<PredictionInterval> analytic,
                 std::span<const double> grid, double step) {
  if (grid.empty()) return found.set.empty();
  double el = 1, eu = 0;  // empty expectation by default
  if (analytic) {
    el = std::max(analytic->lower, grid.front());
    eu = std::min(analytic->upper, grid.back());
  }
  if (found.set.empty()) return el > eu || eu - el < step;
  if (found.set.size() != 1) return false;
  const auto h = hull(found.set);
  return std::abs(h.lower - el) <= step * (1 + 1e-9) && std::abs(h.upper - eu) <= step * (1 + 1e-9);
}

void grid_equivalence(Criterion& c) {
  Rng rng(99);
  std::size_t agreed = 0, comparisons = 0;
  const std::size_t instances = 200;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const std::size_t n = 5 + rng.below(46);
    const double alpha = rng.uniform(0.05, 0.5);
    std::vector<double> y(n), yh(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform(0, 20);
      yh[i] = std::max(0.0, y[i] + rng.normal(0, 1 + 2 * rng.uniform()));
    }
    std::vector<double> cuts{5 + 10 * rng.uniform()};
    if (rng.bernoulli(0.5)) cuts.push_back(cuts[0] + 1 + 4 * rng.uniform());
    const ConformalCalibration calib(y, yh, alpha, bins_from_cutpoints(cuts, 0.0),
                                     CalibrationOptions{{}, true});
    const auto grid = default_grid(calib, 4001);
    const double step = (grid.back() - grid.front()) / (grid.size() - 1);
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      const double y_hat = rng.uniform(0, 22);
      ok &= hull_agrees(grid_interval(y_hat, calib.scores(), grid, alpha),
                        scp_interval(y_hat, calib).interval, grid, step);
      ++comparisons;
      for (std::size_t b = 0; b < calib.partition().bin_count(); ++b) {
        if (calib.bin_scores(b).empty()) continue;
        std::vector<double> sub;
        for (double g : grid)
          if (g >= calib.partition().bin_lower(b) && g < calib.partition().bin_upper(b))
            sub.push_back(g);
        ok &= hull_agrees(grid_interval(y_hat, calib.bin_scores(b), sub, alpha),
                          bccp_per_bin_interval(y_hat, b, calib), sub, step);
        ++comparisons;
      }
    }
    agreed += ok;
  }
  c.check(agreed == instances,
          fmt("%zu of %zu instances agree within one grid step (%zu comparisons, 4001 points)",
              agreed, instances, comparisons));
}

void structural(Criterion& c) {
  Rng rng(5150);
  std::size_t one_bin_equal = 0, one_bin_total = 0, contained = 0, contained_total = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 10 + rng.below(200);
    std::vector<double> y(n), yh(n);
    for (std::size_t i = 0; i < n; ++i) {
      yh[i] = std::exp(rng.normal());
      y[i] = yh[i] * std::exp(rng.normal(0, 0.6));
    }
    const auto t = OutcomeTransform(rng.bernoulli(0.5) ? OutcomeTransform::Kind::identity
                                                       : OutcomeTransform::Kind::log);
    const double alpha = rng.uniform(0.05, 0.5);
    const ConformalCalibration one(y, yh, alpha, BinPartition::whole(0.0), CalibrationOptions{t});
    const ConformalCalibration many(y, yh, alpha, bins_from_percentiles(y, 2 + rng.below(5), 0.0),
                                    CalibrationOptions{t, true});
    for (int k = 0; k < 20; ++k) {
      const double y_hat = std::exp(rng.normal(0, 1.5));
      ++one_bin_total;
      one_bin_equal += bccp_discontiguous(y_hat, one).set ==
                       IntervalSet(scp_interval(y_hat, one).interval);
      const auto d = bccp_discontiguous(y_hat, many).set;
      const auto h = bccp_contiguous(y_hat, many).interval;
      ++contained_total;
      contained += std::all_of(d.segments().begin(), d.segments().end(), [&](const auto& s) {
        return h.lower <= s.lower && s.upper <= h.upper;
      });
    }
  }
  c.check(one_bin_equal == one_bin_total,
          fmt("one-bin bccp-d == scp on %zu of %zu cases", one_bin_equal, one_bin_total));
  c.check(contained == contained_total,
          fmt("bccp-c contains bccp-d on %zu of %zu cases", contained, contained_total));

  std::size_t round_trips = 0;
  const std::size_t files = 200;
  for (std::size_t f = 0; f < files; ++f) {
    std::vector<IntervalRecord> records;
    for (std::uint64_t r = 0, rows = 1 + rng.below(20); r < rows; ++r) {
      std::vector<PredictionInterval> pieces;
      for (std::uint64_t k = 0, segs = rng.below(4); k < segs; ++k) {
        const double a = rng.normal() * std::pow(10.0, rng.uniform(-5, 5));
        pieces.emplace_back(a, rng.bernoulli(0.1) ? kInf : a + std::abs(rng.normal()));
      }
      Flags flags;
      if (rng.bernoulli(0.2)) flags.set(Flag::infinite_quantile);
      if (rng.bernoulli(0.2)) flags.set(Flag::rounded);
      records.push_back({std::to_string(r), unite(pieces), flags});
    }
    std::stringstream buf;
    write_intervals(buf, records);
    round_trips += parse_intervals(read_csv(buf)) == records;
  }
  c.check(round_trips == files, fmt("interval CSV round-trip exact on %zu of %zu files",
                                    round_trips, files));

  auto config = StudyConfig::lognormal_study();
  config.n = 2000;
  config.replications = 4;
  config.bootstrap_draws = 500;
  config.threads = 1;
  const auto a = run_replications(config);
  config.threads = 4;
  const auto b = run_replications(config);
  std::ostringstream sa, sb;
  write_report(sa, a.rows);
  write_report(sb, b.rows);
  bool identical = a.rows.size() == b.rows.size() && sa.str() == sb.str();
  for (std::size_t i = 0; identical && i < a.rows.size(); ++i) {
    identical = std::memcmp(&a.rows[i].coverage, &b.rows[i].coverage, sizeof(double)) == 0 &&
                std::memcmp(&a.rows[i].mean_width, &b.rows[i].mean_width, sizeof(double)) == 0;
  }
  c.check(identical, "same seed, 1 and 4 threads: reports bit-identical");
}

void widths(Criterion& c) {
  const auto& r = lognormal_report;
  if (r.rows.empty()) {
    c.check(false, "log-normal study report unavailable");
    return;
  }
  auto w = [&](const char* m) { return r.row(m, "all"); };
  auto le = [&](const char* small, const char* big) {
    const auto a = w(small), b = w(big);
    const double se = std::hypot(a.mean_width_se, b.mean_width_se);
    c.check(a.mean_width <= b.mean_width + se,
            fmt("%-22s %.4f <= %-22s %.4f + 1 SE (%.4f)", small, a.mean_width, big,
                b.mean_width, se));
  };
  le("bccp-d(percentiles:2)", "bccp-d(percentiles:4)");
  le("bccp-d(percentiles:4)", "bccp-d(percentiles:6)");
  le("scp", "bccp-d(percentiles:4)");
}

void baselines(Criterion& c) {
  // Poisson quantiles by direct cdf summation.
  auto quantile = [](double mu, double target) {
    double pmf = std::exp(-mu), cdf = pmf;
    int k = 0;
    while (cdf < target) {
      ++k;
      pmf *= mu / k;
      cdf += pmf;
    }
    return k;
  };
  const auto p = poisson_interval(4, 0.1);
  c.check(p.lower == quantile(4, 0.05) && p.upper == quantile(4, 0.95) && p.lower == 1 &&
              p.upper == 8,
          fmt("poisson(mu 4, alpha 0.1) = [%g, %g], cdf oracle [%d, %d]", p.lower, p.upper,
              quantile(4, 0.05), quantile(4, 0.95)));

  const auto ln = lognormal_interval(0, 1, 0.1);
  const double z = 1.6448536269514722;
  c.check(std::abs(ln.lower - std::exp(-z)) < 1e-3 && std::abs(ln.upper - std::exp(z)) < 1e-3,
          fmt("lognormal(0, 1, 0.1) = [%.6f, %.6f], expected [%.6f, %.6f] within 1e-3", ln.lower,
              ln.upper, std::exp(-z), std::exp(z)));

  Rng rng(31);
  const Eigen::Index n = 30;
  Matrix x(n, 1);
  std::vector<double> y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(0, 1);
    y[i] = 0.5 + 1.5 * x(i, 0) + rng.normal(0, 0.3);
  }
  const Matrix design = with_intercept(x);
  for (double tau : {0.1, 0.5, 0.9}) {
    const auto fit = quantreg_fit(x, y, tau);
    auto loss = [&](double b0, double b1) {
      Vector beta(2);
      beta << b0, b1;
      return mean_pinball_loss(design, y, beta, tau);
    };
    // Coarse grid over a fixed box, then a fine grid around its best cell.
    double best = kInf, c0 = 0, c1 = 0;
    for (double b0 = -2; b0 <= 3; b0 += 0.01) {
      for (double b1 = -2; b1 <= 5; b1 += 0.01) {
        const double l = loss(b0, b1);
        if (l < best) best = l, c0 = b0, c1 = b1;
      }
    }
    for (double b0 = c0 - 0.02; b0 <= c0 + 0.02; b0 += 0.0001) {
      for (double b1 = c1 - 0.02; b1 <= c1 + 0.02; b1 += 0.0001) best = std::min(best, loss(b0, b1));
    }
    c.check(std::abs(fit.loss - best) <= 1e-4,
            fmt("quantreg tau %.1f loss %.7f, grid minimum %.7f (tolerance 1e-4)", tau, fit.loss,
                best));
  }
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run("1 log-normal study coverage (R=100, +/-0.03)", lognormal_study);
  run("2 zero-inflated count study pattern (R=50)", count_study);
  run("3 conformal guarantee (1000 replicates, alpha 0.1/0.2/0.5)", guarantee);
  run("4 grid oracle equivalence (200 instances, n_calib <= 50)", grid_equivalence);
  run("5 structural properties", structural);
  run("6 width tendency (R=100, 1 SE margin)", widths);
  run("7 baseline unit checks", baselines);
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
