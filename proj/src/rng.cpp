#include "contrasum/rng.hpp"

#include "contrasum/errors.hpp"

namespace contrasum {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr uint64_t kGolden2 = 0xC2B2AE3D27D4EB4Full;
}  // namespace

uint64_t mix64(uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t Rng::next_u64() {
  state_ += kGolden;
  uint64_t x = state_;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t Rng::next_below(uint64_t n) {
  if (n == 0) {
    throw ContractError("Rng::next_below: bound must be positive");
  }
  return next_u64() % n;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_double(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
  // mix64 already adds the golden increment, so pre-add is not repeated here.
  uint64_t s = mix64(seed ^ (kGolden * (a + 1)));
  return mix64(s ^ (kGolden2 * (b + 1)));
}

}  // namespace contrasum
