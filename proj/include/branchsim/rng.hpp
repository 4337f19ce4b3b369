#pragma once

#include <cstdint>

namespace branchsim {

// 64-bit avalanche mix (the splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// splitmix64 stream.  State advances by the 64-bit golden ratio and each
// output is the mixed state, so streams whose initial states differ in a
// single bit are already decorrelated.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Initial state for the substream addressed by (a, b, c) under `seed`.
//
//   state = mix64(seed ^ 0x9E3779B97F4A7C15)
//         ^ mix64(a    ^ 0x6A09E667F3BCC909)
//         ^ mix64(b    ^ 0xBB67AE8584CAA73B)
//         ^ mix64(c    ^ 0x3C6EF372FE94F82B)
//
// Each slot is whitened through mix64 with its own constant before the
// xor, so (seed, a, b, c) tuples that differ in any coordinate land on
// unrelated states.  Every Monte Carlo trial in this project draws from
// derive_stream(seed, row, col, trial); standalone estimators use
// row = col = 0.  The mapping is part of the output contract: results
// depend only on these four integers, never on scheduling.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  std::uint64_t s = mix64(seed ^ 0x9E3779B97F4A7C15ULL);
  s ^= mix64(a ^ 0x6A09E667F3BCC909ULL);
  s ^= mix64(b ^ 0xBB67AE8584CAA73BULL);
  s ^= mix64(c ^ 0x3C6EF372FE94F82BULL);
  return Rng(s);
}

// Binomial(n, p) variate.  Inversion for n*min(p,1-p) < 30, the BTPE
// rejection sampler above that, so cost is O(1) even for n ~ 1e9.
// Consumes a variable number of uniforms from `rng`.
std::int64_t sample_binomial(std::int64_t n, double p, Rng& rng);

// Quantile of Binomial(n, p) at u in [0, 1): the least k with F(k) >= u.
// Monotone in u, p and n, which is what couples trajectories driven by
// shared uniforms.  O(sqrt(n)) per call around the mode.
std::int64_t binomial_quantile(std::int64_t n, double p, double u);

}  // namespace branchsim
