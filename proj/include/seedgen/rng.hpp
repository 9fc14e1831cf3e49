#pragma once

#include <cstdint>
#include <random>

namespace seedgen {

// Seeded RNG wrapper. mt19937_64 output is fully specified by the standard;
// all derived draws below avoid std::*_distribution, whose output is
// implementation-defined, so streams are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform index in [0, n). n must be > 0.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace seedgen
