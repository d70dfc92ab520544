#include "bccp/simulation.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "bccp/error.hpp"
#include "bccp/rng.hpp"

namespace bccp {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::calibration: return "calibration";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "calibration" || name == "calib") return Split::calibration;
  if (name == "test") return Split::test;
  throw Error(ErrorCode::parse_failure, "unknown split '" + std::string(name) + "'");
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(i);
  return out;
}

Matrix Dataset::features_of(Split s) const {
  const auto idx = indices(s);
  Matrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(idx[r]));
  return out;
}

std::vector<double> Dataset::y_of(Split s) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(y[i]);
  return out;
}

Dataset lognormal_dgp(std::size_t n, std::uint64_t seed, double sigma) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "n must be positive");
  Rng rng(seed);
  Dataset data;
  data.seed = seed;
  data.features.resize(static_cast<Eigen::Index>(n), 2);
  data.y.resize(n);
  data.split.assign(n, Split::train);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.uniform();
    const double x2 = rng.uniform();
    data.features(static_cast<Eigen::Index>(i), 0) = x1;
    data.features(static_cast<Eigen::Index>(i), 1) = x2;
    data.y[i] = std::exp(rng.normal(x1 + x2, sigma));
  }
  return data;
}

Dataset zero_inflated_count_dgp(std::size_t n, std::uint64_t seed,
                                const CountDgpParams& params) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "n must be positive");
  if (!(params.zero_prob >= 0.0 && params.zero_prob <= 1.0))
    throw Error(ErrorCode::invalid_argument, "zero probability outside [0, 1]");
  Rng rng(seed);
  Dataset data;
  data.seed = seed;
  data.features.resize(static_cast<Eigen::Index>(n), 2);
  data.y.resize(n);
  data.split.assign(n, Split::train);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.uniform();
    const double x2 = rng.uniform();
    const bool zero = rng.uniform() < params.zero_prob;
    // Drawn unconditionally so every row consumes the same stream length.
    const double latent = rng.normal(params.a * x1 + params.b * x2, params.s);
    data.features(static_cast<Eigen::Index>(i), 0) = x1;
    data.features(static_cast<Eigen::Index>(i), 1) = x2;
    data.y[i] = zero ? 0.0 : std::floor(std::exp(latent) + 0.5);
  }
  return data;
}

SplitCounts split_counts(std::size_t n, const SplitProportions& p) {
  if (!(p.train > 0.0) || !(p.calibration > 0.0) || !(p.test > 0.0))
    throw Error(ErrorCode::invalid_split, "every split proportion must be positive");
  if (std::abs(p.train + p.calibration + p.test - 1.0) > 1e-9)
    throw Error(ErrorCode::invalid_split, "split proportions must sum to 1");
  const auto nd = static_cast<double>(n);
  const auto calib = static_cast<std::size_t>(std::floor(nd * p.calibration + 1e-9));
  const auto test = static_cast<std::size_t>(std::floor(nd * p.test + 1e-9));
  return {n - calib - test, calib, test};
}

void split(Dataset& data, const SplitProportions& proportions, std::uint64_t seed) {
  const auto counts = split_counts(data.size(), proportions);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t k = 0; k < order.size(); ++k) {
    Split s = Split::train;
    if (k >= counts.train + counts.calibration) s = Split::test;
    else if (k >= counts.train) s = Split::calibration;
    data.split[order[k]] = s;
  }
}

}  // namespace bccp
