#pragma once

#include <cstdint>
#include <random>

namespace neardiag {

/// Seeded generator with a fixed mapping from raw 64-bit draws to doubles.
/// std::uniform_real_distribution is implementation-defined; mapping the bits
/// ourselves keeps byte-identical reruns independent of the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }

private:
    std::mt19937_64 gen_;
};

}  // namespace neardiag
