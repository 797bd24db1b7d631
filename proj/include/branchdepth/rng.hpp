#pragma once

#include <cmath>
#include <cstdint>

namespace branchdepth {

// Stateless counter-based generator: every draw is a pure hash of
// (seed, stream, counter).  Draws therefore do not depend on evaluation
// order or thread scheduling, which keeps generated scenes bit-identical
// at any worker count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream,
             std::uint64_t start_counter = 0)
      : seed_(seed), stream_(stream), counter_(start_counter) {}

  std::uint64_t next_u64() { return hash3(seed_, stream_, counter_++); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, n); n > 0.  Modulo bias is irrelevant at the
  // ranges used here (n << 2^64).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Box-Muller; consumes two counters per draw.
  double gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925287 * u2);
  }

  static std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = split_mix(a);
    h = split_mix(h ^ (b + 0x9E3779B97F4A7C15ull));
    h = split_mix(h ^ (c + 0xC2B2AE3D27D4EB4Full));
    return h;
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace branchdepth
