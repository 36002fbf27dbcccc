#pragma once

#include <cmath>
#include <cstdint>

namespace bmpc {

/// Counter-based deterministic generator. Draw i (1-based) of stream `seed`
/// is the splitmix64 finalizer applied to seed + i * 0x9e3779b97f4a7c15;
/// every distribution below consumes a documented number of raw draws, so
/// any (seed, draw index) pair reproduces bit-exactly on every platform.
struct Rng {
  uint64_t seed = 0;
  uint64_t counter = 0;

  explicit Rng(uint64_t s) : seed(s) {}

  /// One raw draw (consumes 1 counter tick).
  uint64_t next_u64() {
    ++counter;
    uint64_t z = seed + counter * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) from the top 53 bits (1 draw).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi) (1 draw).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller, cosine branch only (2 draws):
  /// sqrt(-2 ln u1) cos(2 pi u2), with u1 = 0 replaced by 2^-53.
  double gaussian() {
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Normal with the given standard deviation (2 draws).
  double gaussian(double stddev) { return stddev * gaussian(); }
};

}  // namespace bmpc
