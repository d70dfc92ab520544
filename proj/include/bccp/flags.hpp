#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace bccp {

/// Conditions raised while building an interval. Serialized in the interval
/// CSV as '|'-separated names.
enum class Flag : std::uint32_t {
  clamped_prediction = 1u << 0,   // y_hat below support, moved to support_min
  infinite_quantile = 1u << 1,    // too few scores; interval falls back to the range
  empty_bin_fallback = 1u << 2,   // bin had no calibration data, whole bin used
  quantile_crossing = 1u << 3,    // quantile regression bounds crossed and were swapped
  poisson_fallback = 1u << 4,     // NB moments implied underdispersion
  log1p_clamp = 1u << 5,          // e^t - 1 < 0 clamped to 0
  empty_acceptance = 1u << 6,     // grid oracle accepted no points
  grid_mismatch = 1u << 7,        // analytic and grid results differ by > one step
  rounded = 1u << 8,              // bounds rounded to integers
};

class Flags {
 public:
  constexpr Flags() = default;
  constexpr Flags(Flag f) : bits_(static_cast<std::uint32_t>(f)) {}  // NOLINT

  constexpr bool has(Flag f) const noexcept {
    return (bits_ & static_cast<std::uint32_t>(f)) != 0;
  }
  constexpr void set(Flag f) noexcept { bits_ |= static_cast<std::uint32_t>(f); }
  constexpr Flags& operator|=(Flags other) noexcept {
    bits_ |= other.bits_;
    return *this;
  }
  constexpr bool any() const noexcept { return bits_ != 0; }
  constexpr std::uint32_t bits() const noexcept { return bits_; }

  std::string to_string() const;
  /// Inverse of to_string. Unknown names throw parse_failure.
  static Flags parse(std::string_view text);

  friend constexpr bool operator==(Flags, Flags) = default;

 private:
  std::uint32_t bits_ = 0;
};

}  // namespace bccp
