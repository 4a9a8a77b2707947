#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace macrobell {

/// Deterministic random layer: a fixed engine plus hand-rolled conversions,
/// so streams are bit-reproducible across platforms and standard-library
/// versions.
class Rng {
 public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box–Muller, one cached spare.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Binomial(n, p) by explicit Bernoulli trials; n stays small here
    /// (per-pulse photon counts).
    int binomial(int n, double p) {
        if (p <= 0.0) return 0;
        if (p >= 1.0) return n;
        int successes = 0;
        for (int i = 0; i < n; ++i)
            if (uniform() < p) ++successes;
        return successes;
    }

 private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 step; used to derive independent per-chunk stream seeds from
/// the master seed.
inline uint64_t derive_stream_seed(uint64_t master, uint64_t stream) {
    uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace macrobell
