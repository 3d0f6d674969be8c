#pragma once

#include <cstdint>

namespace crane {

// splitmix64: tiny deterministic generator, identical output on every
// platform. Used for scenario generation and hash-based tie breaking so
// that runs are reproducible byte for byte.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1) with 53-bit resolution
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + u01() * (hi - lo); }
};

inline std::uint64_t mix_hash(std::uint64_t a) {
    SplitMix64 g(a);
    return g.next();
}

inline std::uint64_t mix_hash(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
    g.next();
    return g.next() ^ b * 0xff51afd7ed558ccdULL;
}

inline std::uint64_t mix_hash(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_hash(mix_hash(a, b), c);
}

}  // namespace crane
