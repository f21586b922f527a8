#pragma once

#include <cstdint>
#include <random>

namespace denslice {

// Deterministic draws on top of std::mt19937_64. The standard distributions
// are implementation-defined, so outputs would differ across standard
// libraries; these helpers keep seeded runs reproducible everywhere.
class rng {
 public:
  explicit rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1) with 53 random bits
  double unif01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // uniform in (lo, hi); retries the measure-zero endpoint hits
  double open_interval(double lo, double hi) {
    double u;
    do {
      u = lo + unif01() * (hi - lo);
    } while (u <= lo || u >= hi);
    return u;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace denslice
