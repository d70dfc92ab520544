#include "bccp/transform.hpp"

#include <cmath>

#include "bccp/error.hpp"
#include "bccp/interval.hpp"

namespace bccp {

OutcomeTransform OutcomeTransform::parse(std::string_view name) {
  if (name == "identity" || name == "none") return OutcomeTransform(Kind::identity);
  if (name == "log") return OutcomeTransform(Kind::log);
  if (name == "log1p") return OutcomeTransform(Kind::log1p);
  throw Error(ErrorCode::invalid_argument,
              "unknown transform '" + std::string(name) + "'");
}

std::string OutcomeTransform::name() const {
  switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::log: return "log";
    case Kind::log1p: return "log1p";
  }
  return "identity";
}

bool OutcomeTransform::in_domain(double y) const noexcept {
  switch (kind_) {
    case Kind::identity: return !std::isnan(y);
    case Kind::log: return y > 0.0;
    case Kind::log1p: return y >= 0.0;
  }
  return false;
}

double OutcomeTransform::forward(double y) const {
  if (!in_domain(y)) {
    throw Error(ErrorCode::transform_domain,
                name() + " transform undefined for y = " + std::to_string(y));
  }
  switch (kind_) {
    case Kind::identity: return y;
    case Kind::log: return std::log(y);
    case Kind::log1p: return std::log1p(y);
  }
  return y;
}

double OutcomeTransform::inverse(double t) const noexcept {
  switch (kind_) {
    case Kind::identity: return t;
    case Kind::log: return std::exp(t);
    case Kind::log1p: return t < 0.0 ? 0.0 : std::expm1(t);
  }
  return t;
}

bool OutcomeTransform::inverse_clamps(double t) const noexcept {
  return kind_ == Kind::log1p && t < 0.0;
}

double OutcomeTransform::forward_bound(double y) const noexcept {
  switch (kind_) {
    case Kind::identity: return y;
    case Kind::log: return y > 0.0 ? std::log(y) : -kInf;
    case Kind::log1p: return y > -1.0 ? std::log1p(y) : -kInf;
  }
  return y;
}

}  // namespace bccp
