#pragma once

#include <cstdint>
#include <random>

namespace relaydetect {

/// SplitMix64 finalizer. Used to turn structured keys into well-mixed seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based split of a master seed. The result depends only on the
/// (master, arm, index) triple, so trials can be scheduled in any order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t arm,
                          std::uint64_t index) noexcept;

/**
 * A seeded random stream owned by exactly one consumer.
 *
 * Wraps a 64-bit Mersenne twister with the few draws the simulator needs.
 * Two streams built from the same seed produce identical sequences.
 */
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  static RandomStream derive(std::uint64_t master, std::uint64_t arm,
                             std::uint64_t index) {
    return RandomStream(derive_seed(master, arm, index));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  double normal();
  /// Equiprobable draw from {-1, +1}.
  int sign();
  /// Uniform on [0, 1).
  double uniform();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace relaydetect
