#pragma once

#include <cstdint>

namespace fppm {

/// Counter-based random stream. The state is derived purely from the seed and
/// up to three key words, so a stream keyed by (pixel, iteration, purpose) emits
/// the same sequence no matter which thread runs it or in what order streams
/// are created. That is what makes renders bit-identical across thread counts.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t k1 = 0,
                     std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    state_ = mix(seed + 0x9e3779b97f4a7c15ull);
    state_ = mix(state_ ^ mix(k1 + 0xbf58476d1ce4e5b9ull));
    state_ = mix(state_ ^ mix(k2 + 0x94d049bb133111ebull));
    state_ = mix(state_ ^ mix(k3 + 0xd6e8feb86659fd93ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

} // namespace fppm
