#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bccp/models.hpp"

namespace bccp {

enum class Split : std::uint8_t { train, calibration, test };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

/// Rows of features and outcome, each labelled with the split it belongs to.
struct Dataset {
  Matrix features;  // n x p
  std::vector<double> y;
  std::vector<Split> split;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return y.size(); }
  std::vector<std::size_t> indices(Split s) const;
  Matrix features_of(Split s) const;
  std::vector<double> y_of(Split s) const;
};

/// x1, x2 ~ U(0,1); log y ~ N(x1 + x2, sigma).
Dataset lognormal_dgp(std::size_t n, std::uint64_t seed, double sigma = 0.5);

struct CountDgpParams {
  double zero_prob = 0.867;
  double a = 2.0;
  double b = 2.0;
  double s = 1.0;
};

/// Zero-inflated, right-skewed counts. With probability zero_prob y = 0,
/// otherwise y = round(exp(N(a x1 + b x2, s))). Features are drawn for every
/// row.
Dataset zero_inflated_count_dgp(std::size_t n, std::uint64_t seed,
                                const CountDgpParams& params = {});

struct SplitProportions {
  double train = 0.5;
  double calibration = 0.25;
  double test = 0.25;
};

struct SplitCounts {
  std::size_t train, calibration, test;
};

/// calibration = floor(n * c), test = floor(n * t), train takes the rest.
SplitCounts split_counts(std::size_t n, const SplitProportions& proportions);

/// Random permutation, then contiguous train / calibration / test blocks.
void split(Dataset& data, const SplitProportions& proportions, std::uint64_t seed);

}  // namespace bccp
