#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace bccp {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for one stream: (base seed, replicate index, purpose tag). Streams
/// with different tags or replicates are decorrelated by mix64.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replicate,
                          std::string_view purpose) noexcept;

/// Deterministic generator. The engine is mt19937_64, whose output sequence
/// is fixed by the C++ standard; the distributions are implemented here
/// because the standard library ones differ between vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Box-Muller normal deviate.
  double normal(double mean = 0.0, double sd = 1.0);
  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bccp
