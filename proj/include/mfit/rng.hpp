#pragma once

#include <cmath>
#include <cstdint>

namespace mfit {

// SplitMix64: used both as a generator and to derive disjoint child seeds
// from a master seed. Bit-stable across platforms, unlike
// std::normal_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; caches the second deviate.
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        cached_ = mag * std::sin(ang);
        have_cached_ = true;
        return mag * std::cos(ang);
    }

    // Deterministic child stream; distinct tags give independent streams.
    Rng fork(std::uint64_t tag) const {
        Rng mix(state_ ^ (0xD1B54A32D192ED03ull * (tag + 1)));
        return Rng(mix.next_u64());
    }

private:
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace mfit
