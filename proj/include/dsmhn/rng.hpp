#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dsmhn {

/// Seeded random source used by every stochastic step (init, sampling,
/// synthetic data, splits).
///
/// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. The standard distributions are not portable across library
/// implementations, so the conversions to floats, indices and normals are
/// done here:
///   uniform()   = (bits >> 11) * 2^-53, in [0, 1)
///   index(n)    = rejection sampling on the top bits, unbiased
///   normal()    = Box-Muller, no cached second variate
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t index(std::uint64_t n) {
    // Largest multiple of n that fits; values above it are rejected.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return r % n;
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Derive an independent child stream (used to give each pipeline stage
  /// its own seed from one top-level seed).
  Rng fork() { return Rng(engine_() ^ 0x9e3779b97f4a7c15ULL); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsmhn
