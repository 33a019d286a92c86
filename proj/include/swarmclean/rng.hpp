#pragma once

#include <cstdint>
#include <random>

namespace swarmclean {

/// SplitMix64 finalizer. Used to derive independent seeds from (seed, stream)
/// pairs so that a robot's random stream depends only on its own index.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

// Stream ids. Robot i uses kRobotStreamBase + i.
inline constexpr std::uint64_t kPlacementStream = 0;
inline constexpr std::uint64_t kRobotStreamBase = 1;

/// Seedable generator with platform-independent real/bit draws.
///
/// std::uniform_real_distribution is implementation-defined, so it is not used
/// here: every draw is built directly from the raw 64-bit engine output, which
/// keeps trajectories bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace swarmclean
