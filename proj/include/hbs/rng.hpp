#pragma once

#include <cmath>
#include <cstdint>

#include "hbs/common.hpp"

namespace hbs {

// xorshift64* (Vigna, "An experimental exploration of Marsaglia's xorshift
// generators"). Used instead of std::mt19937 so that every stream is
// bit-reproducible across platforms and standard libraries.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed = 42)
      : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next() {
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Box-Muller. Two uniforms per call keeps the stream
  // position independent of how results are consumed.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  Complex cnormal() { return Complex(normal(), normal()); }

 private:
  std::uint64_t state_;
};

}  // namespace hbs
