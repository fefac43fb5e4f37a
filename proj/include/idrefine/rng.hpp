#pragma once

#include <cstdint>
#include <random>

namespace idrefine {

// Seedable generator used everywhere a run needs randomness.
//
// Version 1: std::mt19937_64 seeded with the 64-bit seed. Its output
// sequence is fixed by the C++ standard; the reductions below are our own
// rather than std::uniform_*_distribution, whose algorithms vary between
// standard libraries. Changing any of this changes every seeded fixture.
class Rng {
 public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Uniform integer in [0, n), by rejection. n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace idrefine
