#pragma once

#include <cstdint>
#include <random>

#include "tnar/numkit/linalg.hpp"

namespace tnar::numkit {

// Seeded generator whose output is identical across platforms: bits come from
// mt19937_64 (fully specified by the standard) and every distribution is
// implemented here rather than taken from <random>.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(mix(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    // Standard normal via the Marsaglia polar method.
    double normal();

    // Independent child stream; deterministic in (this state, key).
    Rng split(std::uint64_t key);

    static std::uint64_t mix(std::uint64_t x);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// n i.i.d. samples from N(0, sigma^2).
Vector gaussian(Rng& rng, std::size_t n, double sigma);

// Gaussian sample normalized to unit length.
Vector random_unit(Rng& rng, std::size_t n);

}  // namespace tnar::numkit
