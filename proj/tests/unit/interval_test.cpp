#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bccp/error.hpp"
#include "bccp/interval.hpp"
#include "bccp/rng.hpp"

using namespace bccp;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_SUITE("interval") {

TEST_CASE("percentile bins on 1..100") {
  std::vector<double> y;
  for (int i = 1; i <= 100; ++i) y.push_back(i);
  const auto p = bins_from_percentiles(y, 4);
  // type-7: h = 99 j/4, interpolate between the order statistics
  REQUIRE(p.breakpoints().size() == 3);
  CHECK(p.breakpoints()[0] == doctest::Approx(25.75));
  CHECK(p.breakpoints()[1] == doctest::Approx(50.5));
  CHECK(p.breakpoints()[2] == doctest::Approx(75.25));
  CHECK_FALSE(p.collapsed());
}

TEST_CASE("percentile bins need distinct values") {
  const std::vector<double> y{5, 5, 5, 5};
  CHECK(code_of([&] { bins_from_percentiles(y, 2); }) == ErrorCode::degenerate_partition);
  CHECK(code_of([&] { bins_from_percentiles(std::vector<double>{}, 2); }) ==
        ErrorCode::degenerate_partition);
  CHECK(code_of([&] { bins_from_percentiles(std::vector<double>{1, 2, 3}, 1); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("median split with half zeros puts every zero in the first bin") {
  std::vector<double> y(100, 0.0);
  for (int i = 1; i <= 100; ++i) y.push_back(i);
  const auto p = bins_from_percentiles(y, 2);
  REQUIRE(p.bin_count() == 2);
  std::size_t first = 0;
  for (double v : y) first += p.assign(v) == 0;
  CHECK(first == 100);
  CHECK(p.assign(0.0) == 0);
}

TEST_CASE("ties collapse percentile breakpoints") {
  std::vector<double> y(90, 0.0);
  for (int i = 1; i <= 10; ++i) y.push_back(i);
  const auto p = bins_from_percentiles(y, 4, 0.0);
  CHECK(p.collapsed());
  CHECK(p.bin_count() < 4);
}

TEST_CASE("fatality cutpoints") {
  const std::vector<double> cuts{1, 3, 8, 21, 55, 149};
  const auto p = bins_from_cutpoints(cuts, 0.0);
  REQUIRE(p.bin_count() == 7);
  const double lower[] = {0, 1, 3, 8, 21, 55, 149};
  for (std::size_t b = 0; b < 7; ++b) CHECK(p.bin_lower(b) == lower[b]);
  CHECK(p.bin_upper(6) == kInf);
  CHECK(p.assign(0) == 0);
  CHECK(p.assign(2) == 1);
  CHECK(p.assign(7) == 2);
  CHECK(p.assign(20) == 3);
  CHECK(p.assign(54) == 4);
  CHECK(p.assign(148) == 5);
  CHECK(p.assign(149) == 6);

  const auto zeros = bins_from_cutpoints(std::vector<double>{1}, 0.0);
  CHECK(zeros.bin_count() == 2);
  CHECK(zeros.assign(0) == 0);
  CHECK(zeros.assign(1) == 1);

  CHECK(code_of([] { bins_from_cutpoints(std::vector<double>{3, 2}, 0.0); }) ==
        ErrorCode::invalid_cutpoints);
  CHECK(code_of([] { bins_from_cutpoints(std::vector<double>{0, 2}, 0.0); }) ==
        ErrorCode::invalid_cutpoints);
}

TEST_CASE("assign_bin boundaries") {
  const auto p = bins_from_cutpoints(std::vector<double>{1, 3}, -kInf);
  CHECK(p.assign(1.0) == 1);
  CHECK(p.assign(0.999) == 0);
  CHECK(p.assign(1e9) == 2);
  const auto s = bins_from_cutpoints(std::vector<double>{1, 3}, 0.0);
  CHECK(code_of([&] { s.assign(-0.5); }) == ErrorCode::out_of_support);
}

TEST_CASE("union and hull") {
  const IntervalSet merged{{1, 3}, {2, 5}};
  REQUIRE(merged.size() == 1);
  CHECK(merged.segments()[0] == PredictionInterval(1, 5));

  const IntervalSet apart{{4, 5}, {1, 2}};
  REQUIRE(apart.size() == 2);
  CHECK(apart.segments()[0] == PredictionInterval(1, 2));
  CHECK(apart.segments()[1] == PredictionInterval(4, 5));

  CHECK(unite(std::vector<PredictionInterval>{}).empty());
  CHECK(hull(apart) == PredictionInterval(1, 5));
  CHECK(hull(IntervalSet(PredictionInterval(3, 3))) == PredictionInterval(3, 3));
  CHECK(hull(IntervalSet{{0, 1}, {10, kInf}}) == PredictionInterval(0, kInf));
  CHECK(code_of([] { hull(IntervalSet{}); }) == ErrorCode::empty_set);
}

TEST_CASE("contains and width") {
  const IntervalSet s{{1, 2}, {4, 5}};
  CHECK_FALSE(s.contains(3));
  CHECK(IntervalSet(PredictionInterval(1, 2)).contains(2));
  CHECK(s.contains(1));
  CHECK(s.contains(4.5));
  CHECK_FALSE(s.contains(5.5));
  CHECK(IntervalSet{{1, 2}, {4, 6}}.total_width() == 3);
  CHECK(IntervalSet(PredictionInterval(0, 10)).total_width() == 10);
  CHECK(IntervalSet{{0, 1}, {3, kInf}}.total_width() == kInf);
  CHECK(code_of([] { PredictionInterval(2, 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("union membership matches a dense scan") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PredictionInterval> pieces;
    const auto count = 1 + rng.below(6);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double a = std::floor(rng.uniform(0, 40)) / 4;
      const double b = a + std::floor(rng.uniform(0, 12)) / 4;
      pieces.emplace_back(a, b);
    }
    const auto set = unite(pieces);
    for (std::size_t i = 1; i < set.size(); ++i)
      CHECK(set.segments()[i - 1].upper < set.segments()[i].lower);
    double width = 0.0;
    for (const auto& s : set.segments()) width += s.width();
    CHECK(set.total_width() == doctest::Approx(width));
    for (double y = -1; y <= 15; y += 0.125) {
      const bool any = std::any_of(pieces.begin(), pieces.end(),
                                   [y](const auto& p) { return p.contains(y); });
      CHECK(set.contains(y) == any);
    }
  }
}

TEST_CASE("percentile bins balance continuous samples") {
  Rng rng(5);
  for (std::size_t k : {2u, 4u, 6u, 10u}) {
    std::vector<double> y(1000);
    for (auto& v : y) v = rng.normal();
    const auto p = bins_from_percentiles(y, k);
    REQUIRE(p.bin_count() == k);
    std::vector<std::size_t> counts(k, 0);
    for (double v : y) ++counts[p.assign(v)];
    for (auto c : counts) CHECK(std::abs(static_cast<double>(c) - 1000.0 / k) <= 2.0);
  }
}

}  // TEST_SUITE
