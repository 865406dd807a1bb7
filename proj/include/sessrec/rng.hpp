#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "sessrec/common.hpp"

namespace sessrec {

// All randomness in a run flows from one root seed through named derivation,
// so components (shuffling, negative sampling, init) stay independent and
// ablations see identical data order.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t root, std::string_view label, uint64_t a = 0,
                            uint64_t b = 0) {
  uint64_t h = fnv1a(label, root ^ 0x51ed270b9f6cca3dull);
  h = fnv1a(&a, sizeof a, h);
  h = fnv1a(&b, sizeof b, h);
  return splitmix64(h);
}

// mt19937_64 gives a fully specified stream; the distributions here are our
// own because the std:: ones are implementation-defined and runs must be
// byte-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform integer in [0, bound), bound > 0. Rejection keeps it unbiased.
  uint64_t uniform(uint64_t bound) {
    const uint64_t limit = bound * (UINT64_MAX / bound);
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % bound;
  }

  int64_t uniform_int(int64_t lo, int64_t hi) {  // inclusive range
    return lo + static_cast<int64_t>(uniform(static_cast<uint64_t>(hi - lo + 1)));
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform_real() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

  // Box-Muller; the spare keeps consecutive draws cheap and deterministic.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform_real();
    } while (u1 <= 0.0);
    u2 = uniform_real();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  bool bernoulli(double p) { return uniform_real() < p; }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sessrec
