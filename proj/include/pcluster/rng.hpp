#pragma once

#include <cstdint>
#include <random>

namespace pcluster {

// Counter-based seed splitting. A Seed names a stream; child(i) derives an
// independent stream for sub-task i, so results never depend on the order
// or thread in which sub-tasks run.
class Seed {
 public:
  constexpr Seed() = default;
  constexpr explicit Seed(std::uint64_t value) : value_(value) {}

  constexpr std::uint64_t value() const { return value_; }

  constexpr Seed child(std::uint64_t index) const {
    return Seed(mix(value_ ^ mix(index + 0x632be59bd9b4e019ULL)));
  }

  std::mt19937_64 engine() const { return std::mt19937_64(mix(value_)); }

  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  friend constexpr bool operator==(Seed, Seed) = default;

 private:
  std::uint64_t value_ = 0;
};

}  // namespace pcluster
