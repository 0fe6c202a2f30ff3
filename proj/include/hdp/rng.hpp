#pragma once

// Counter-free splittable PRNG plus the samplers used by the noise models.
//
// Generator: SplitMix64 (Steele, Lea, Flood, "Fast splittable pseudorandom
// number generators", OOPSLA 2014). Chosen over mt19937 because substreams
// are derived by finalizer mixing rather than by seeding a large state, which
// keeps (master seed, cell, run) -> stream reproducible across platforms and
// thread counts.

#include <cmath>
#include <cstdint>

namespace hdp {

// Finalizer of SplitMix64; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream seed for run `run` of the work unit `unit` (e.g. a benchmark cell).
// Chained mixing keeps distinct (master, unit, run) triples decorrelated.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t unit,
                                    std::uint64_t run) {
    return mix64(mix64(mix64(master) ^ unit) ^ run);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Standard normal via the polar (Marsaglia) variant of Box-Muller on the
// uniform stream above. Produces pairs; the spare is cached.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng_.next_double() - 1.0;
            v = 2.0 * rng_.next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double next_uniform() { return rng_.next_double(); }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace hdp
