#pragma once

#include <string>
#include <string_view>

namespace bccp {

/// Invertible outcome transform used for model fitting and for the scale on
/// which nonconformity scores are measured.
class OutcomeTransform {
 public:
  enum class Kind { identity, log, log1p };

  constexpr OutcomeTransform() = default;
  constexpr explicit OutcomeTransform(Kind kind) : kind_(kind) {}

  static OutcomeTransform parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;

  /// Throws transform_domain outside the valid domain (log: y > 0,
  /// log1p: y >= 0).
  double forward(double y) const;

  /// Inverse map. log1p inverts as e^t - 1 clamped at 0.
  double inverse(double t) const noexcept;
  /// True when inverse(t) hits the log1p clamp.
  bool inverse_clamps(double t) const noexcept;

  /// Image of a raw-scale lower bound. Values at or below the domain edge
  /// map to the transformed scale's own lower limit (-inf for log).
  double forward_bound(double y) const noexcept;

  bool in_domain(double y) const noexcept;

  friend bool operator==(OutcomeTransform, OutcomeTransform) = default;

 private:
  Kind kind_ = Kind::identity;
};

}  // namespace bccp
