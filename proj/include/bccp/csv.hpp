#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bccp/evaluation.hpp"
#include "bccp/flags.hpp"
#include "bccp/interval.hpp"
#include "bccp/simulation.hpp"

namespace bccp {

// File formats: comma-separated, fixed header on the first line, '.' decimal
// separator, reals in shortest round-trip form, infinities as `inf`/`-inf`.

inline constexpr std::string_view kCalibrationHeader = "row_id,y_true,y_pred";
inline constexpr std::string_view kTestHeader = "row_id,y_pred,y_true";
inline constexpr std::string_view kIntervalHeader = "row_id,segment_index,lower,upper,flags";
inline constexpr std::string_view kReportHeader =
    "method,group,n,coverage,coverage_se,mean_width,inf_width_count,discontiguity_rate";

std::string format_real(double v);
/// Accepts anything format_real writes. Throws parse_failure.
double parse_real(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws parse_failure naming the missing column.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

struct CalibrationRecord {
  std::string row_id;
  double y_true = 0.0;
  double y_pred = 0.0;
};

struct TestRecord {
  std::string row_id;
  double y_pred = 0.0;
  std::optional<double> y_true;
};

struct IntervalRecord {
  std::string row_id;
  IntervalSet set;
  Flags flags;

  friend bool operator==(const IntervalRecord&, const IntervalRecord&) = default;
};

std::vector<CalibrationRecord> parse_calibration(const CsvTable& table);
std::vector<TestRecord> parse_test(const CsvTable& table);

void write_calibration(std::ostream& out, std::span<const CalibrationRecord> records);
void write_test(std::ostream& out, std::span<const TestRecord> records);

/// One row per segment; an empty set is one row with blank bounds.
void write_intervals(std::ostream& out, std::span<const IntervalRecord> records);
/// Groups rows by row_id in order of first appearance.
std::vector<IntervalRecord> parse_intervals(const CsvTable& table);

void write_report(std::ostream& out, std::span<const ReportRow> rows);

/// row_id,split,x1..xp,y
void write_dataset(std::ostream& out, const Dataset& data);
Dataset parse_dataset(const CsvTable& table);

}  // namespace bccp
