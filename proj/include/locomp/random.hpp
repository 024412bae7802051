#pragma once

#include <cstddef>
#include <cstdint>

namespace locomp {

/// SplitMix64 finalizer. Also the building block of every seeded stream.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based draw: the value at position `counter` of the stream keyed by
/// `key`. Independent of call order.
constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(mix64(key) ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Derives a substream key from a run seed and up to three indices.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) noexcept {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ mix64(a + 0x632be59bd9b4e019ULL));
  k = mix64(k ^ mix64(b + 0x8cb92ba72f3d8dd7ULL));
  k = mix64(k ^ mix64(c + 0x4f1bbcdcbfa53e0bULL));
  return k;
}

/// Sequential stream over counter_hash. Distributions are implemented here
/// rather than with <random> so streams replay identically across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept { return counter_hash(key_, counter_++); }

  double uniform01() noexcept { return to_unit(next_u64()); }

  /// Uniform integer in [0, bound). bound must be >= 1.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace locomp
