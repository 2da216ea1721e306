#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "garling/big_index.hpp"

namespace garling {

// Deterministic random helpers.  std::mt19937_64 output is fully specified by
// the standard; the distributions below are built directly from its bits so
// that seeded runs are reproducible across compilers and platforms
// (std::uniform_real_distribution makes no such guarantee).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1).
    double uniform01() { return std::ldexp(static_cast<double>(bits() >> 11), -53); }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n-1] without modulo bias worth worrying about here.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : bits() % n; }

    int sign() { return (bits() & 1u) ? 1 : -1; }

    // Signed magnitude spread log-uniformly across `decades` decades ending at
    // 10^top_exp.  Default: magnitudes in [1e-2, 1e2).
    double heavy(double decades = 4.0, double top_exp = 2.0) {
        double e = top_exp - decades * uniform01();
        return sign() * std::pow(10.0, e);
    }

    // Uniform BigIndex in [1, n].
    BigIndex index_in(BigIndex n) {
        if (n <= 1) return 1;
        __uint128_t span = static_cast<__uint128_t>(n);
        __uint128_t r = (static_cast<__uint128_t>(bits()) << 64) | bits();
        return static_cast<BigIndex>(r % span) + 1;
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace garling
