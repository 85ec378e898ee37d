#pragma once

#include <cmath>
#include <cstdint>

namespace skelrep {

// Counter-based deterministic stream: identical (seed, key) gives an identical
// draw sequence regardless of what other streams do, so augmentation workers
// can run in any order. Keys are built from (epoch, sample, view).
class RngStream {
public:
    RngStream(uint64_t seed, uint64_t key) : state_(mix(mix(seed) ^ mix(key ^ 0x9e3779b97f4a7c15ULL))) {}

    static uint64_t make_key(uint64_t epoch, uint64_t sample, uint64_t view) {
        uint64_t k = mix(epoch + 0x9e3779b97f4a7c15ULL);
        k = mix(k ^ (sample + 0xbf58476d1ce4e5b9ULL));
        k = mix(k ^ (view + 0x94d049bb133111ebULL));
        return k;
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

    // Box-Muller; one draw per call, pair cached.
    double normal(double mean, double stddev) {
        if (has_cached_) {
            has_cached_ = false;
            return mean + stddev * cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return mean + stddev * r * std::cos(a);
    }

private:
    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace skelrep
