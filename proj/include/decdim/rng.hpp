#pragma once

#include <cstdint>

namespace decdim {

// SplitMix64 finalizer; used as the mixing function of the seed stream.
inline std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based random stream. Every draw is a pure function of
// (seed, round, lane, counter), so replicates can run in any order or in
// parallel and still reproduce bit for bit.
class SeedStream {
 public:
  // Lanes keep the environment and the algorithm from sharing draws.
  enum Lane : std::uint64_t { kEnvironment = 1, kAlgorithm = 2, kSetup = 3 };

  SeedStream(std::uint64_t seed, std::uint64_t round, std::uint64_t lane)
      : key_(Mix64(Mix64(Mix64(seed) ^ round) ^ lane)) {}

  std::uint64_t NextU64() { return Mix64(key_ ^ Mix64(counter_++)); }
  // Uniform in [0, 1) with 53 random bits.
  double NextUniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }
  // Standard normal via Box-Muller (one draw per call, cosine branch).
  double NextGaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Seed of the i-th task derived from a master seed (documented in README).
inline std::uint64_t TaskSeed(std::uint64_t master, std::uint64_t i) {
  return Mix64(master ^ Mix64(i + 1));
}

}  // namespace decdim
