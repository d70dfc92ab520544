#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bccp/error.hpp"

namespace bccp::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_data = 3,
  exit_numerical = 4,
};

int exit_code_for(ErrorCategory category) noexcept;

/// Runs one command line (without the program name). Files named "-" or
/// left unset go to `out`; diagnostics go to `err`.
///
///   simulate   generate a dataset, optionally with calibration/test files
///   intervals  build prediction sets from calibration and test files
///   evaluate   coverage and width reports for interval files
///   report     run a replicated simulation study
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bccp::cli
