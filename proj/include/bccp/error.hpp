#pragma once

#include <stdexcept>
#include <string>

namespace bccp {

/// Broad failure class. The CLI maps these onto exit codes 2, 3 and 4.
enum class ErrorCategory { config, data, numerical };

enum class ErrorCode {
  degenerate_partition,
  invalid_cutpoints,
  out_of_support,
  empty_set,
  empty_calibration,
  empty_bin,
  invalid_argument,
  invalid_dispersion,
  non_convergence,
  singular_design,
  transform_domain,
  shape_mismatch,
  invalid_split,
  io_failure,
  parse_failure,
};

constexpr ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_cutpoints:
    case ErrorCode::invalid_split:
      return ErrorCategory::config;
    case ErrorCode::non_convergence:
    case ErrorCode::singular_design:
    case ErrorCode::invalid_dispersion:
      return ErrorCategory::numerical;
    default:
      return ErrorCategory::data;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace bccp
