#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "betagan/errors.hpp"

namespace betagan {

/// Deterministic seeded generator. The distribution transforms are written
/// out here instead of using std::*_distribution, whose output sequences are
/// implementation-defined; this way identical seeds give identical streams on
/// any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n).
    std::size_t index(std::size_t n) {
        if (n == 0) throw ContractError("Rng::index: n must be positive");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t reject_above = UINT64_MAX - UINT64_MAX % bound - 1;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r <= reject_above) return static_cast<std::size_t>(r % bound);
        }
    }

    /// Standard normal via Box-Muller; the paired deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Independent child stream; fork(k) depends only on (seed, k), not on
    /// how much of this stream was consumed.
    Rng fork(std::uint64_t stream) const {
        return Rng(splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace betagan
