#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "uavdet/common.hpp"

namespace uavdet {

// Counter-based random streams. Every value is a pure function of
// (seed, stream, counter), so parallel generation is order-independent
// and two runs with the same seed are bit-identical on any platform.
// Gaussians use Box-Muller on explicit 53-bit uniforms instead of
// std::normal_distribution, whose output is implementation-defined.

inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_u64(uint64_t seed, uint64_t stream, uint64_t counter) {
    return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

/// Uniform in [0,1) with 53-bit resolution.
inline double uniform_at(uint64_t seed, uint64_t stream, uint64_t counter) {
    return static_cast<double>(hash_u64(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Standard normal pair from counters (counter, counter+1 are consumed conceptually
/// but only `counter` is passed; the two uniforms come from sub-streams).
inline void gaussian_pair_at(uint64_t seed, uint64_t stream, uint64_t counter,
                             double& g0, double& g1) {
    const double u1 = static_cast<double>(
                          hash_u64(seed, stream * 2 + 1, counter) >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(
                          hash_u64(seed, stream * 2 + 2, counter) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1 > 0.0 ? u1 : 0x1.0p-53));
    g0 = r * std::cos(2.0 * kPi * u2);
    g1 = r * std::sin(2.0 * kPi * u2);
}

/// Circular complex Gaussian with E|n|^2 = sigma2, addressed by (stream, counter).
inline cd complex_gaussian_at(uint64_t seed, uint64_t stream, uint64_t counter,
                              double sigma2) {
    double g0 = 0.0, g1 = 0.0;
    gaussian_pair_at(seed, stream, counter, g0, g1);
    const double s = std::sqrt(sigma2 * 0.5);
    return {s * g0, s * g1};
}

/// Sequential convenience stream on top of the counter hash.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    uint64_t next_u64() { return hash_u64(seed_, stream_, counter_++); }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [0, n).
    uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double g0 = 0.0, g1 = 0.0;
        gaussian_pair_at(seed_, stream_ ^ 0x5A5A5A5AULL, counter_++, g0, g1);
        spare_ = g1;
        have_spare_ = true;
        return g0;
    }

    double rayleigh(double sigma) {
        const double u = uniform();
        return sigma * std::sqrt(-2.0 * std::log(u > 0.0 ? u : 0x1.0p-53));
    }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace uavdet
