#pragma once

#include <cstdint>

namespace contrasum {

// Counter-based pseudo-random stream (SplitMix64).
//
// The generator is pinned to this exact algorithm so that augmentation draws,
// parameter init and epoch shuffles are reproducible bit-for-bit across
// platforms and across independent implementations:
//
//   state += 0x9E3779B97F4A7C15
//   x = state
//   x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
//   x = (x ^ (x >> 27)) * 0x94D049BB133111EB
//   output = x ^ (x >> 31)
//
// Bounded draws use plain modulo (next_u64() % n); the bias is negligible for
// the tiny bounds used here and keeps the contract trivial to restate.
// Doubles take the top 53 bits: (next_u64() >> 11) * 2^-53, in [0, 1).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();

  // Uniform in [0, n); n must be > 0.
  uint64_t next_below(uint64_t n);

  // Uniform in [0, 1).
  double next_double();

  // Uniform in [lo, hi).
  double next_double(double lo, double hi);

 private:
  uint64_t state_;
};

// SplitMix64 finalizer, usable as a standalone 64-bit mixer.
uint64_t mix64(uint64_t x);

// Decorrelated sub-stream seed for (a, b) under a root seed:
//   derive_seed(s, a, b) = mix64(mix64(s ^ G1*(a+1)) ^ G2*(b+1))
// with G1 = 0x9E3779B97F4A7C15 and G2 = 0xC2B2AE3D27D4EB4F. Used for
// per-document/per-view augmentation streams, per-epoch shuffles and
// ablation-cell seeds.
uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b);

// Fixed stream tags for derive_seed so independent consumers of one run seed
// never collide.
namespace stream_tag {
inline constexpr uint64_t kParamInit = 0x01;
inline constexpr uint64_t kShuffle = 0x02;
inline constexpr uint64_t kAugmentEpoch = 0x03;
inline constexpr uint64_t kAblationCell = 0x04;
}  // namespace stream_tag

}  // namespace contrasum
