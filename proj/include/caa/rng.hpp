#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace caa {

// Engine: std::mt19937_64 (fully specified by the standard, so the raw stream
// is portable). Only the raw 64-bit output is used; all conversions to bits,
// doubles and bounded integers are done here instead of through
// <random> distributions, whose algorithms are implementation-defined.
//
// Streams: every (experiment, grid point, replicate, role) tuple gets its own
// engine seeded with derive_seed(master, label, indices...), a SplitMix64
// finalizer chained over an FNV-1a hash of the label.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64; seeds derived by splitmix64(fnv1a64(label) ^ master ^ index chain)";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) noexcept {
  return splitmix64(master ^ fnv1a64(label));
}

template <typename... Indices>
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t first, Indices... rest) noexcept {
  return derive_seed(splitmix64(derive_seed(master, label) + first), label,
                     static_cast<std::uint64_t>(rest)...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint8_t bit() { return static_cast<std::uint8_t>(next() >> 63); }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace caa
