#pragma once

#include <cstdint>

namespace ccw {

// Counter-based deterministic generator. Every draw is a pure function of
// (seed, stream, counter), so parallel schedules cannot change the sample
// sequence and runs are bit-reproducible across platforms.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    double uniform01() { return bits_to_unit(next_bits()); }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform in [-1, 1).
    double symmetric() { return 2.0 * uniform01() - 1.0; }

    uint64_t next_bits() { return mix(seed_, stream_, counter_++); }

    static double bits_to_unit(uint64_t x) {
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }

    static uint64_t mix(uint64_t seed, uint64_t stream, uint64_t counter) {
        // splitmix64 over a combined key
        uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) + counter;
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        // one extra round to decorrelate small counters
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
};

}  // namespace ccw
