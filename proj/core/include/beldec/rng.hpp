#pragma once

#include <cstdint>

namespace beldec {

// splitmix64 finalizer: the only mixing primitive we use, chosen because it is
// integer-only and therefore bit-identical across platforms and compilers.
inline uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

// Counter-based generator. Every draw is a pure function of
// (seed, stream, counter): streams derived from the same seed are disjoint by
// construction and a replay with the same seed reproduces every draw exactly.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : base_(mix64(mix64(seed + 0x9E3779B97F4A7C15ull) ^ mix64(stream + 0xD1B54A32D192ED03ull))) {}

  uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ull;
    return mix64(base_ ^ counter_);
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  int next_bernoulli(double p) { return next_double() < p ? 1 : 0; }

 private:
  uint64_t base_;
  uint64_t counter_ = 0;
};

}  // namespace beldec
