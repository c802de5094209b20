#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mzsim {

/// Name recorded in output provenance for the child-seed mixing function.
inline constexpr std::string_view kChildSeedFunction =
    "splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15)";

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). A bijection on 64-bit words.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for the index-th independent sub-stream of master_seed. Distinct indices
/// always give distinct seeds because the additive step is odd and the mix is bijective.
constexpr std::uint64_t derive_child_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return splitmix64_mix(master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Seeded random stream. The engine is mt19937_64, whose output sequence is fixed by
/// the C++ standard; the real-valued draws below are spelled out explicitly so a run
/// is reproducible across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Exponential with the given rate (mean 1/rate), by inversion.
  double exponential(double rate);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mzsim
