#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aplab {

/// Seeded RNG wrapper. mt19937_64 output is pinned by the standard, and the
/// real-valued draws below avoid std::uniform_real_distribution (whose exact
/// stream is implementation-defined), so a fixed seed reproduces the same
/// bytes on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Log-uniform in [a, b]; requires 0 < a <= b.
  double log_uniform(double a, double b) { return a * std::exp(uniform() * std::log(b / a)); }

  /// Uniform integer in [0, n). Modulo bias is irrelevant for the small n
  /// used here and keeps the draw sequence trivially portable.
  std::int64_t uniform_int(std::int64_t n) {
    return static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace aplab
