// Seeded random generation for inputs and kernels.
//
// Generator: xoshiro256++ seeded via splitmix64. The uniform 64-bit stream is
// fully specified by the seed, so generated values repeat bit-for-bit across
// runs. Normal deviates use the Marsaglia polar method.

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

#include "spconv/conv.hpp"
#include "spconv/grid.hpp"

namespace spconv {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        for (auto& word : state_) word = splitmix64_next(seed);
    }

    std::uint64_t next() {
        const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::array<std::uint64_t, 4> state_;
};

/// Standard normal deviates, two per polar rejection round.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * gen_.uniform01() - 1.0;
            v = 2.0 * gen_.uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    Xoshiro256pp gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline Grid random_normal_grid(index_t rows, index_t cols, std::uint64_t seed) {
    Grid g(rows, cols);
    NormalSampler normal(seed);
    for (auto& v : g.values) v = normal.next();
    return g;
}

inline Kernel random_normal_kernel(index_t k, std::uint64_t seed) {
    NormalSampler normal(seed);
    std::vector<double> v(static_cast<std::size_t>(k * k));
    for (auto& x : v) x = normal.next();
    return Kernel(k, std::move(v));
}

/// Per-index stream seed derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t state = base ^ (0x9E3779B97F4A7C15ull * (index + 1));
    return splitmix64_next(state);
}

}  // namespace spconv
