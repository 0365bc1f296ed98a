#pragma once

// SplitMix64: tiny, fast, well-mixed 64-bit generator. Every consumer takes
// an explicit generator (or seed) — there is no hidden global entropy, so
// runs are reproducible bit-for-bit. substream() derives independent streams
// for replicated experiments.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qest {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; one draw per call, spare cached
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) {
            u1 = next_double();
        }
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // generator for replica `index`, decorrelated from this stream
    SplitMix64 substream(std::uint64_t index) const {
        SplitMix64 mix(state_ ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        mix.next_u64();
        return SplitMix64(mix.next_u64());
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace qest
