#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace advrand {

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Combines values into one seed; order matters.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// FNV-1a over the bytes of `s`, for turning ids into seed material.
std::uint64_t hash_string(std::string_view s) noexcept;

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the distributions below are implemented here
/// rather than taken from <random> because the standard library ones are
/// allowed to differ between implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer on the closed range [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);
  /// Standard normal via Box-Muller.
  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace advrand
