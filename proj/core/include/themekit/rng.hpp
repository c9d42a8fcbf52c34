#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

#include "themekit/errors.hpp"

namespace themekit {

namespace detail {
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}
}  // namespace detail

// Deterministic splittable RNG built on splitmix64. All randomness in the
// toolkit flows through this type so that a single seed reproduces a run
// bit-for-bit on any platform (the std <random> distributions are
// implementation-defined and unsuitable for that).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). Unbiased via rejection.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw DomainError("uniform_index: empty range");
    const std::uint64_t un = n;
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % un + 1) % un;
    if (rem == 0) return static_cast<std::size_t>(next_u64() % un);
    const std::uint64_t limit = 0 - rem;  // 2^64 - rem
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % un);
  }

  // Independent child stream. The same (state, label) always yields the same
  // child, so components can derive their own streams from a global seed.
  Rng split(std::string_view label) const {
    std::uint64_t z = state_ ^ detail::fnv1a64(label);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::uint64_t state_;
};

// Draws one index from unnormalized nonnegative weights. Zero-weight entries
// are never returned; the total weight must be positive.
inline std::size_t weighted_index(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DomainError("weighted_index: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("weighted_index: total weight is zero");
  const double u = rng.next_double() * total;
  double acc = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;  // guards against floating-point shortfall at u ~ total
}

}  // namespace themekit
