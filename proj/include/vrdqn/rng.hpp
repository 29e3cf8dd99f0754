#pragma once

#include <cstdint>

namespace vrdqn {

// Deterministic 64-bit generator (splitmix64). The <random> engines are
// portable but their distributions are implementation-defined, so every draw
// the project makes goes through this class; runs reproduce bit-identically
// across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Bias is O(n / 2^53), negligible for the
  // buffer/batch sizes used here.
  int next_below(int n) { return static_cast<int>(next_double() * n); }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Decorrelated child generator for (seed, stream). Distinct streams let the
  // trainer keep env seeding, action selection, batch sampling and inner-loop
  // draws independent, which is what makes record/replay exact.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    Rng mixer(seed ^ (0x6a09e667f3bcc909ULL * (stream + 1)));
    mixer.next_u64();
    return Rng(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
};

}  // namespace vrdqn
