#include "bccp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "bccp/error.hpp"

namespace bccp {
namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.emplace_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

void check_id(std::string_view id) {
  if (id.find_first_of(",\"\n\r") != std::string_view::npos)
    throw Error(ErrorCode::invalid_argument,
                "row id '" + std::string(id) + "' contains a separator");
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view text) {
  if (text == "inf" || text == "+inf") return kInf;
  if (text == "-inf") return -kInf;
  if (text == "nan") return std::nan("");
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw Error(ErrorCode::parse_failure, "cannot parse '" + std::string(text) + "' as a number");
  return v;
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw Error(ErrorCode::parse_failure, "missing column '" + std::string(name) + "'");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw Error(ErrorCode::parse_failure,
                  "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::parse_failure, "empty CSV input (no header)");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open '" + path + "' for reading");
  return read_csv(in);
}

std::vector<CalibrationRecord> parse_calibration(const CsvTable& table) {
  const auto id = table.column("row_id");
  const auto yt = table.column("y_true");
  const auto yp = table.column("y_pred");
  std::vector<CalibrationRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows)
    out.push_back({row[id], parse_real(row[yt]), parse_real(row[yp])});
  return out;
}

std::vector<TestRecord> parse_test(const CsvTable& table) {
  const auto id = table.column("row_id");
  const auto yp = table.column("y_pred");
  const auto yt = table.find_column("y_true");
  std::vector<TestRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    TestRecord rec{row[id], parse_real(row[yp]), std::nullopt};
    if (yt && !row[*yt].empty()) rec.y_true = parse_real(row[*yt]);
    out.push_back(std::move(rec));
  }
  return out;
}

void write_calibration(std::ostream& out, std::span<const CalibrationRecord> records) {
  out << kCalibrationHeader << '\n';
  for (const auto& r : records) {
    check_id(r.row_id);
    out << r.row_id << ',' << format_real(r.y_true) << ',' << format_real(r.y_pred) << '\n';
  }
}

void write_test(std::ostream& out, std::span<const TestRecord> records) {
  out << kTestHeader << '\n';
  for (const auto& r : records) {
    check_id(r.row_id);
    out << r.row_id << ',' << format_real(r.y_pred) << ','
        << (r.y_true ? format_real(*r.y_true) : std::string()) << '\n';
  }
}

void write_intervals(std::ostream& out, std::span<const IntervalRecord> records) {
  out << kIntervalHeader << '\n';
  for (const auto& r : records) {
    check_id(r.row_id);
    const auto flags = r.flags.to_string();
    if (r.set.empty()) {
      out << r.row_id << ",0,,," << flags << '\n';
      continue;
    }
    std::size_t index = 0;
    for (const auto& seg : r.set.segments()) {
      out << r.row_id << ',' << index++ << ',' << format_real(seg.lower) << ','
          << format_real(seg.upper) << ',' << flags << '\n';
    }
  }
}

std::vector<IntervalRecord> parse_intervals(const CsvTable& table) {
  const auto id = table.column("row_id");
  const auto seg = table.column("segment_index");
  const auto lo = table.column("lower");
  const auto hi = table.column("upper");
  const auto fl = table.column("flags");

  std::vector<IntervalRecord> out;
  std::vector<std::vector<PredictionInterval>> pieces;
  for (const auto& row : table.rows) {
    if (out.empty() || out.back().row_id != row[id]) {
      for (const auto& r : out)
        if (r.row_id == row[id])
          throw Error(ErrorCode::parse_failure,
                      "segments of row '" + row[id] + "' are not contiguous");
      out.push_back({row[id], {}, Flags::parse(row[fl])});
      pieces.emplace_back();
    }
    const double expected = static_cast<double>(pieces.back().size());
    if (parse_real(row[seg]) != expected)
      throw Error(ErrorCode::parse_failure, "unexpected segment_index for row '" + row[id] + "'");
    if (row[lo].empty() && row[hi].empty()) continue;  // empty set
    pieces.back().emplace_back(parse_real(row[lo]), parse_real(row[hi]));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].set = IntervalSet(pieces[i]);
  return out;
}

void write_report(std::ostream& out, std::span<const ReportRow> rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.group << ',' << r.n << ',' << format_real(r.coverage) << ','
        << format_real(r.coverage_se) << ',' << format_real(r.mean_width) << ','
        << r.inf_width_count << ',' << format_real(r.discontiguity_rate) << '\n';
  }
}

void write_dataset(std::ostream& out, const Dataset& data) {
  out << "row_id,split";
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) out << ",x" << (j + 1);
  out << ",y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i << ',' << split_name(data.split[i]);
    for (Eigen::Index j = 0; j < data.features.cols(); ++j)
      out << ',' << format_real(data.features(static_cast<Eigen::Index>(i), j));
    out << ',' << format_real(data.y[i]) << '\n';
  }
}

Dataset parse_dataset(const CsvTable& table) {
  const auto sp = table.column("split");
  const auto yc = table.column("y");
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 1;; ++j) {
    auto c = table.find_column("x" + std::to_string(j));
    if (!c) break;
    feature_cols.push_back(*c);
  }
  Dataset data;
  const auto n = table.rows.size();
  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    data.split.push_back(parse_split(row[sp]));
    data.y.push_back(parse_real(row[yc]));
    for (std::size_t j = 0; j < feature_cols.size(); ++j)
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_real(row[feature_cols[j]]);
  }
  return data;
}

}  // namespace bccp
