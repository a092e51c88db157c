#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vbd {

/// Seed used everywhere unless the caller overrides it.
inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Deterministic random stream. All randomness in the library flows from a
/// single 64-bit seed through this class; `fork` derives an independent
/// stream from a textual label so consumers cannot disturb each other's
/// draws when code is added or reordered.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits() { return gen_(); }

  /// Uniform in [0, 1) from the top 53 bits of the engine output. Avoids
  /// std::uniform_real_distribution, whose output is not specified
  /// identically across standard library implementations.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(bits() % n); }

  /// Child stream keyed by (seed, label). Stable under insertion of new
  /// fork sites elsewhere.
  SeededRng fork(std::string_view label) const {
    return SeededRng(splitmix(seed_ ^ fnv1a(label)));
  }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace vbd
