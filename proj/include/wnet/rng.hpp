#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "wnet/common.hpp"

namespace wnet {

inline u64 splitmix64(u64& state) {
    u64 z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Combines a seed with a stream tag into a new seed.
inline u64 mix_seed(u64 seed, u64 tag) {
    u64 s = seed ^ (0x9e3779b97f4a7c15ULL + (tag << 1));
    splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256++ with explicit seeding and hand-rolled distributions, so that
/// every draw is reproducible independent of the standard library
/// implementation.
class Rng {
public:
    explicit Rng(u64 seed) : seed_(seed) {
        u64 s = seed;
        for (auto& word : state_) {
            word = splitmix64(s);
        }
    }

    u64 seed() const { return seed_; }

    /// Independent child stream; a pure function of (seed, tag).
    Rng derive(u64 tag) const { return Rng(mix_seed(seed_, tag)); }

    u64 next() {
        const u64 result = rotl(state_[0] + state_[3], 23) + state_[0];
        const u64 t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); rejection sampled, exact.
    u64 bounded(u64 n) {
        if (n == 0) {
            throw ValueError("bounded(0) is undefined");
        }
        const u64 threshold = (0ULL - n) % n;
        for (;;) {
            const u64 r = next();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Fisher-Yates; identical results on every platform.
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static u64 rotl(u64 x, int k) { return (x << k) | (x >> (64 - k)); }

    u64 seed_;
    std::array<u64, 4> state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace wnet
