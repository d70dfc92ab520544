#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bccp/cli.hpp"
#include "bccp/csv.hpp"

using namespace bccp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string dir() {
  const fs::path p = fs::path(BCCP_TEST_TMP) / "cli";
  fs::create_directories(p);
  return p.string();
}

std::string file(const std::string& name) { return dir() + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<IntervalRecord> intervals_of(const std::string& text) {
  std::istringstream in(text);
  return parse_intervals(read_csv(in));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes the default split and reruns byte-identically") {
  const auto a = run_cli({"simulate", "--dgp", "lognormal", "--n", "10000", "--seed", "7", "--out",
                      file("sim_a.csv")});
  const auto b = run_cli({"simulate", "--dgp", "lognormal", "--n", "10000", "--seed", "7", "--out",
                      file("sim_b.csv")});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(file("sim_a.csv")) == slurp(file("sim_b.csv")));

  std::ifstream in(file("sim_a.csv"));
  const auto data = parse_dataset(read_csv(in));
  CHECK(data.size() == 10'000);
  CHECK(data.indices(Split::train).size() == 5000);
  CHECK(data.indices(Split::calibration).size() == 2500);
  CHECK(data.indices(Split::test).size() == 2500);
}

TEST_CASE("all-zero counts") {
  const auto r = run_cli({"simulate", "--dgp", "zicount", "--n", "1000", "--zero-prob", "1.0"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const auto data = parse_dataset(read_csv(in));
  CHECK(data.size() == 1000);
  for (double y : data.y) CHECK(y == 0);
}

TEST_CASE("exit codes") {
  CHECK(run_cli({}).code == cli::exit_config);
  CHECK(run_cli({"simulate", "--bogus"}).code == cli::exit_config);
  CHECK(run_cli({"simulate", "--dgp", "lognormal", "--zero-prob", "0.5"}).code == cli::exit_config);
  CHECK(run_cli({"simulate", "--dgp", "weibull"}).code == cli::exit_config);
  CHECK(run_cli({"simulate", "--n", "10", "--out", "/nonexistent/dir/x.csv"}).code == cli::exit_data);
  CHECK(run_cli({"--help"}).code == cli::exit_ok);

  write(file("calib3.csv"), "row_id,y_true,y_pred\n1,1,1.5\n2,2,2.5\n3,3,2\n4,4,4.5\n");
  write(file("test3.csv"), "row_id,y_pred\na,1\nb,2\nc,3\n");
  const auto c = file("calib3.csv"), t = file("test3.csv");
  CHECK(run_cli({"intervals", "--calib", c, "--test", t, "--method", "bccp-d"}).code == cli::exit_config);
  CHECK(run_cli({"intervals", "--calib", c, "--test", t, "--method", "scp", "--bins", "1"}).code ==
        cli::exit_config);
  CHECK(run_cli({"intervals", "--calib", c, "--test", t, "--method", "scp", "--alpha", "1.5"}).code ==
        cli::exit_config);
  CHECK(run_cli({"intervals", "--calib", c, "--test", t, "--method", "lognormal"}).code ==
        cli::exit_config);
  CHECK(run_cli({"intervals", "--calib", file("missing.csv"), "--test", t, "--method", "scp"}).code ==
        cli::exit_data);

  write(file("nocol.csv"), "row_id,y_pred\n1,2\n");
  CHECK(run_cli({"intervals", "--calib", file("nocol.csv"), "--test", t, "--method", "scp"}).code ==
        cli::exit_data);
  write(file("empty_calib.csv"), "row_id,y_true,y_pred\n");
  CHECK(run_cli({"intervals", "--calib", file("empty_calib.csv"), "--test", t, "--method", "scp"})
            .code == cli::exit_data);
  // bin [10, inf) has no calibration records
  CHECK(run_cli({"intervals", "--calib", c, "--test", t, "--method", "bccp-d", "--bins", "10"}).code ==
        cli::exit_data);
  CHECK(run_cli({"intervals", "--calib", c, "--test", t, "--method", "bccp-d", "--bins", "10",
             "--allow-empty-bins"})
            .code == cli::exit_ok);
}

TEST_CASE("standard conformal rows are single segments") {
  write(file("calib3.csv"), "row_id,y_true,y_pred\n1,1,1.5\n2,2,2.5\n3,3,2\n4,4,4.5\n");
  write(file("test3.csv"), "row_id,y_pred\na,1\nb,2\nc,3\n");
  const auto r = run_cli({"intervals", "--calib", file("calib3.csv"), "--test", file("test3.csv"),
                      "--method", "scp", "--alpha", "0.5"});
  REQUIRE(r.code == 0);
  const auto records = intervals_of(r.out);
  REQUIRE(records.size() == 3);
  for (const auto& rec : records) CHECK(rec.set.size() == 1);
  CHECK(r.out.find(",1,") == std::string::npos);
  // scores {.5, .5, 1, .5}, rank ceil(5 * .5) = 3 -> q = .5
  CHECK(records[0].set == IntervalSet(PredictionInterval(0.5, 1.5)));
}

TEST_CASE("bin-conditional set with two segments") {
  std::string calib = "row_id,y_true,y_pred\n";
  for (int i = 0; i < 9; ++i) calib += "l" + std::to_string(i) + ",5,5.2\n";
  for (int i = 0; i < 9; ++i) calib += "h" + std::to_string(i) + ",20,25\n";
  write(file("calib_two.csv"), calib);
  write(file("test_two.csv"), "row_id,y_pred\nx,9.5\n");
  const auto r = run_cli({"intervals", "--calib", file("calib_two.csv"), "--test",
                      file("test_two.csv"), "--method", "bccp-d", "--bins", "10",
                      "--support-min", "0", "--oracle-check"});
  REQUIRE(r.code == 0);
  const auto records = intervals_of(r.out);
  REQUIRE(records.size() == 1);
  const auto& set = records[0].set;
  REQUIRE(set.size() == 2);
  CHECK(set.segments()[0].lower == doctest::Approx(9.3));
  CHECK(set.segments()[0].upper == doctest::Approx(9.7));
  CHECK(set.segments()[1] == PredictionInterval(10, 14.5));
  CHECK_FALSE(records[0].flags.has(Flag::grid_mismatch));
  CHECK(r.out.find("x,0,") != std::string::npos);
  CHECK(r.out.find("x,1,") != std::string::npos);
}

TEST_CASE("count pipeline gives integer bounds") {
  REQUIRE(run_cli({"simulate", "--dgp", "zicount", "--n", "20000", "--seed", "3", "--out",
               file("zi.csv"), "--calib-out", file("zi_calib.csv"), "--test-out",
               file("zi_test.csv")})
              .code == 0);
  const auto r = run_cli({"intervals", "--calib", file("zi_calib.csv"), "--test", file("zi_test.csv"),
                      "--method", "bccp-d", "--bins", "1,3,8,21,55,149", "--transform", "log1p",
                      "--round-counts", "--allow-empty-bins", "--out", file("zi_iv.csv")});
  REQUIRE(r.code == 0);
  std::ifstream in(file("zi_iv.csv"));
  for (const auto& rec : parse_intervals(read_csv(in))) {
    CHECK(rec.flags.has(Flag::rounded));
    for (const auto& s : rec.set.segments()) {
      CHECK(s.lower >= 0);
      CHECK(s.lower == std::floor(s.lower));
      CHECK((s.upper == kInf || s.upper == std::floor(s.upper)));
    }
  }
}

TEST_CASE("evaluate") {
  write(file("eval_test.csv"), "row_id,y_pred,y_true\n1,1,1\n2,2,2\n3,3,3\n4,4,40\n");
  write(file("wide.csv"),
        "row_id,segment_index,lower,upper,flags\n1,0,0,100,\n2,0,0,100,\n3,0,0,100,\n4,0,0,100,\n");
  const auto r = run_cli({"evaluate", "--intervals", "wide=" + file("wide.csv"), "--test",
                      file("eval_test.csv"), "--out", file("report.csv"), "--width-out",
                      file("width.csv")});
  REQUIRE(r.code == 0);
  const auto report = slurp(file("report.csv"));
  CHECK(report.starts_with(
      "method,group,n,coverage,coverage_se,mean_width,inf_width_count,discontiguity_rate\n"));
  std::istringstream in(report);
  const auto table = read_csv(in);
  REQUIRE(table.rows.size() == 5);
  for (const auto& row : table.rows) CHECK(row[table.column("coverage")] == "1");
  CHECK(fs::exists(file("report.csv") + ".meta.json"));
  CHECK(fs::exists(file("width.csv")));

  write(file("short.csv"), "row_id,segment_index,lower,upper,flags\n1,0,0,1,\n9,0,0,1,\n"
                           "3,0,0,1,\n4,0,0,1,\n");
  CHECK(run_cli({"evaluate", "--intervals", file("short.csv"), "--test", file("eval_test.csv")}).code ==
        cli::exit_data);
  write(file("empty_test.csv"), "row_id,y_pred,y_true\n");
  CHECK(run_cli({"evaluate", "--intervals", file("wide.csv"), "--test", file("empty_test.csv")}).code ==
        cli::exit_data);
  CHECK(run_cli({"evaluate", "--intervals", file("wide.csv"), "--test", file("eval_test.csv"),
             "--width-by", "x"})
            .code == cli::exit_config);
}

TEST_CASE("report is deterministic") {
  const std::vector<std::string> base{"report", "--study", "lognormal", "--n", "1000", "--reps",
                                      "2", "--methods", "scp", "--methods", "bccp-d=percentiles:2",
                                      "--bootstrap-b", "200"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", file("rep_a.csv")});
  b.insert(b.end(), {"--out", file("rep_b.csv"), "--threads", "1"});
  REQUIRE(run_cli(a).code == 0);
  REQUIRE(run_cli(b).code == 0);
  CHECK(slurp(file("rep_a.csv")) == slurp(file("rep_b.csv")));
  const auto meta = slurp(file("rep_a.csv") + ".meta.json");
  CHECK(meta.find("\"replications\": 2") != std::string::npos);
  CHECK(run_cli({"report", "--zero-prob", "0.5"}).code == cli::exit_config);
}

}  // TEST_SUITE
