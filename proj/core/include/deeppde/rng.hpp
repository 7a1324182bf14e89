#pragma once

#include <cstdint>
#include <vector>

#include "deeppde/errors.hpp"

namespace deeppde {

// SplitMix64 finalizer; a bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based generator: output n of stream s under seed k is
///   mix64(key(k, s) + n * 0x9E3779B97F4A7C15)
/// with key(k, s) = mix64(mix64(k + 0x9E3779B97F4A7C15) ^ (s * 0xD2B74407B1CE6E93)).
/// Identical (seed, stream, counter) gives identical output on every platform.
class RngState {
 public:
  explicit RngState(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), key_(derive_key(seed, stream)) {}

  std::uint64_t next_u64() { return mix64(key_ + (counter_++) * GOLDEN); }

  /// Uniform on [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double next_uniform(double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("uniform_sample: requires lo < hi");
    return lo + (hi - lo) * next_unit();
  }

  /// Standard normal via Box-Muller; consumes two counters per pair and
  /// caches the second deviate so counters advance deterministically.
  double next_gaussian();

  /// Statistically independent stream; injective in index.
  RngState split(std::uint64_t index) const {
    RngState s(seed_, stream_);
    s.key_ = mix64(key_ + mix64(index + 1));
    return s;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  bool operator==(const RngState& o) const {
    return key_ == o.key_ && counter_ == o.counter_ && have_spare_ == o.have_spare_;
  }

 private:
  static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed + GOLDEN) ^ (stream * 0xD2B74407B1CE6E93ull));
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// n i.i.d. standard normals from the counter stream.
std::vector<double> gauss_sample(RngState& rng, std::size_t n);

/// n i.i.d. uniforms on [lo, hi).
std::vector<double> uniform_sample(RngState& rng, double lo, double hi, std::size_t n);

inline RngState split_stream(const RngState& rng, std::uint64_t index) {
  return rng.split(index);
}

}  // namespace deeppde
