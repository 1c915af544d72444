#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Deterministic, order-independent random streams. Scores and splits must be
// reproducible bit-for-bit across runs and independent of iteration order, so
// every draw is keyed by the record it belongs to instead of consuming a
// shared sequential stream.

namespace fairfuse::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ (b + kGolden + (a << 6) + (a >> 2)));
}

// Strictly inside (0, 1): 53 mantissa bits centered on half-steps.
inline double to_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller from a single 64-bit key. Avoids
// std::normal_distribution, whose output is implementation-defined.
inline double normal_from_key(std::uint64_t key) noexcept {
  const double u1 = to_unit(splitmix64(key));
  const double u2 = to_unit(splitmix64(key ^ 0xda3e39cb94b95bdbULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Small sequential PRNG for shuffles (train/test splits).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += kGolden;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  double unit() noexcept { return to_unit(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace fairfuse::rng
