// Reproducible counter-based random number generation.
//
// Contract (bit-exact across platforms and thread schedules):
//   raw(seed, i)   = mix64(seed + (i+1) * 0x9E3779B97F4A7C15)
//   mix64(z): z = (z ^ (z>>30)) * 0xBF58476D1CE4E5B9
//             z = (z ^ (z>>27)) * 0x94D049BB133111EB
//             return z ^ (z>>31)
//   uniform(seed, i) = (raw >> 11) * 2^-53 + 2^-54            in (0,1)
//   gaussian         = inverse_normal_cdf(uniform)             (AS 241)
//   trajectory seed  = mix64(base_seed + (index+1) * 0xD1B54A32D192ED03)
//
// A stream is (seed, counter); identical pairs give identical draws. Each
// trajectory owns one stream and consumes exactly one draw per time step.
#pragma once

#include <cmath>
#include <cstdint>

#include "core/stats.hpp"

namespace qcavity {

inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t counter_raw(uint64_t seed, uint64_t counter) {
    return mix64(seed + (counter + 1) * 0x9E3779B97F4A7C15ull);
}

inline uint64_t derive_trajectory_seed(uint64_t base_seed, uint64_t index) {
    return mix64(base_seed + (index + 1) * 0xD1B54A32D192ED03ull);
}

class NoiseStream {
  public:
    NoiseStream() = default;
    explicit NoiseStream(uint64_t seed, uint64_t counter = 0) : seed_(seed), counter_(counter) {}

    uint64_t seed() const { return seed_; }
    uint64_t counter() const { return counter_; }

    uint64_t next_raw() { return counter_raw(seed_, counter_++); }

    // open interval (0,1), 53-bit resolution
    double next_uniform() {
        return static_cast<double>(next_raw() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double next_gaussian() { return inverse_normal_cdf(next_uniform()); }

    // Wiener increment: N(0, dt)
    double next_dw(double dt) { return next_gaussian() * std::sqrt(dt); }

  private:
    uint64_t seed_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace qcavity
