#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace treegrad {

// Seeded random stream with a fixed draw order, so any run with the same seed
// reproduces the same bytes regardless of platform library internals.  The
// uniform and normal transforms are implemented by hand for that reason: the
// distributions in <random> are not pinned by the standard.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // One draw per call via Box-Muller on two fresh uniforms.  The sine partner
  // is discarded; keeping no cached state makes interleaved use predictable.
  double normal() {
    double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection to kill modulo bias; the loop almost never runs twice.
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Spreads nearby seeds apart before they reach the engine.
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

// Deterministic seed derivation for substreams (per tree, per replicate, per
// grid cell).  Plain addition would make adjacent streams collide after the
// caller adds its own offsets, so fold each part through the mixer.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = RngStream::mix64(base);
  h = RngStream::mix64(h ^ (a + 0x100000001b3ULL));
  h = RngStream::mix64(h ^ (b + 0x9e3779b97f4a7c15ULL));
  h = RngStream::mix64(h ^ c);
  return h;
}

}  // namespace treegrad
