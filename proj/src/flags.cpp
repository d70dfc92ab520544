#include "bccp/flags.hpp"

#include <array>
#include <utility>

#include "bccp/error.hpp"

namespace bccp {
namespace {

constexpr std::array<std::pair<Flag, std::string_view>, 9> kNames{{
    {Flag::clamped_prediction, "clamped_prediction"},
    {Flag::infinite_quantile, "infinite_quantile"},
    {Flag::empty_bin_fallback, "empty_bin_fallback"},
    {Flag::quantile_crossing, "quantile_crossing"},
    {Flag::poisson_fallback, "poisson_fallback"},
    {Flag::log1p_clamp, "log1p_clamp"},
    {Flag::empty_acceptance, "empty_acceptance"},
    {Flag::grid_mismatch, "grid_mismatch"},
    {Flag::rounded, "rounded"},
}};

}  // namespace

std::string Flags::to_string() const {
  std::string out;
  for (const auto& [flag, name] : kNames) {
    if (!has(flag)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

Flags Flags::parse(std::string_view text) {
  Flags flags;
  while (!text.empty()) {
    const auto bar = text.find('|');
    const auto token = text.substr(0, bar);
    bool found = false;
    for (const auto& [flag, name] : kNames) {
      if (token == name) {
        flags.set(flag);
        found = true;
        break;
      }
    }
    if (!found)
      throw Error(ErrorCode::parse_failure,
                  "unknown flag '" + std::string(token) + "'");
    if (bar == std::string_view::npos) break;
    text.remove_prefix(bar + 1);
  }
  return flags;
}

}  // namespace bccp
