#pragma once

#include <cmath>
#include <cstdint>

namespace ccot {

// splitmix64: tiny counter-style generator with a fully specified integer
// stream, so one seed reproduces the same draws on every platform.  Doubles
// are built from the top 53 bits and are exact dyadic rationals.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a logarithm argument.
    double next_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Convenience wrapper adding Box-Muller normal deviates on top of the
// splitmix64 stream.  The integer stream is platform-independent; normal
// deviates additionally go through libm (log, cos, sin), which is bit-stable
// per platform and identical across runs everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_.next_u64(); }
    double uniform() { return gen_.next_double(); }
    double uniform_open() { return gen_.next_open(); }

    // Standard normal via Box-Muller; the second deviate of each pair is
    // cached so draws consume the underlying stream two uniforms at a time.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = gen_.next_open();
        const double u2 = gen_.next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    SplitMix64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ccot
