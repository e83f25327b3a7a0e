#pragma once

#include <cstdint>

#include "iou/box.hpp"
#include "iou/errors.hpp"

namespace iou {

// SplitMix64 generator. Used everywhere randomness is needed so that seeded
// outputs are bit-identical across platforms and thread schedules; the
// standard <random> distributions are implementation-defined and are not.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Deterministic substream derivation: workers / trials / samples seed their
// own generator from (seed, index) so results are independent of scheduling.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed ^ (0xA0761D6478BD642Full * (index + 1)));
  return mix.next();
}

// Random valid box: corners drawn uniformly in [lo, hi], sorted per axis,
// redrawn while width or height falls below min_side.
inline Box random_box(SplitMix64& rng, double lo, double hi, double min_side = 1e-3) {
  if (!(hi - lo > 2.0 * min_side)) {
    throw DomainError("coordinate range too narrow for the minimum box side");
  }
  for (;;) {
    double ax = rng.uniform(lo, hi);
    double bx = rng.uniform(lo, hi);
    double ay = rng.uniform(lo, hi);
    double by = rng.uniform(lo, hi);
    if (ax > bx) { const double t = ax; ax = bx; bx = t; }
    if (ay > by) { const double t = ay; ay = by; by = t; }
    if (bx - ax >= min_side && by - ay >= min_side) {
      return Box{ax, ay, bx, by};
    }
  }
}

}  // namespace iou
