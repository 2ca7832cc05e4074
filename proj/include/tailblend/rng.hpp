#pragma once

// Seeded random streams with deterministic derivation: every repetition or
// component of a study pulls an independent stream keyed by (seed, index),
// so parallel sweeps reproduce serial results bit for bit.

#include <cstdint>
#include <cmath>
#include <random>

namespace tailblend {

// splitmix64 finalizer; used both as a stream-key mixer and seeder.
inline std::uint64_t mix_seed(std::uint64_t state, std::uint64_t index) {
    std::uint64_t z = state + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix_seed(seed, index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(seed), engine_(mix_seed(seed, 0)) {}

    // Independent child stream; derivation depends on the key only, never on
    // how much the parent has drawn.
    Rng sub(std::uint64_t index) const { return Rng(mix_seed(key_, index + 1)); }

    std::uint64_t key() const { return key_; }

    // strictly inside (0,1)
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = uniform(), v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925287 * v;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform()); }

    // Marsaglia-Tsang; shape < 1 via the boost U^(1/shape).
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double gamma(double shape, double rate) { return gamma(shape) / rate; }

    double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

    std::uint64_t bits() { return engine_(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (~n + 1) % n;
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tailblend
