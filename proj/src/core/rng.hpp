#ifndef CELF_CORE_RNG_HPP
#define CELF_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <utility>

namespace celf::rng {

// Counter-based generator: every draw is a pure function of its key, so
// results do not depend on call order or thread count.

inline uint64_t mix(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t key(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
    uint64_t h = mix(seed);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    h = mix(h ^ d);
    return h;
}

// [0,1)
inline double uniform01(uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// (0,1]
inline double uniform01_open0(uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Two independent standard normals from one key (Box-Muller).
inline std::pair<double, double> normal_pair(uint64_t k) {
    const double u1 = uniform01_open0(k);
    const double u2 = uniform01(mix(k ^ 0xd1b54a32d192ed03ull));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// Uniform integer in [0, n); n must be > 0. Modulo bias is irrelevant at
// the scales used here (n far below 2^32).
inline uint64_t below(uint64_t bits, uint64_t n) { return bits % n; }

}  // namespace celf::rng

#endif
