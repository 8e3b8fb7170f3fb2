#pragma once

#include <cmath>
#include <cstdint>

namespace pathhjb {

// Counter-based random numbers: every draw is a pure function of
// (seed, a, b, c). Results are independent of evaluation order and of
// how work is split across threads.

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t counter_hash(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// Uniform in (0,1); never returns 0 or 1 exactly.
inline double u01_from_bits(uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller from a single counter key.
inline double normal_draw(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    const uint64_t h1 = counter_hash(seed, a, b, c);
    const uint64_t h2 = mix64(h1 ^ 0x452821e638d01377ULL);
    const double u1 = u01_from_bits(h1);
    const double u2 = u01_from_bits(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// +1 or -1 with equal probability.
inline double sign_draw(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    return (counter_hash(seed, a, b, c) & 1ULL) ? 1.0 : -1.0;
}

inline double uniform_draw(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    return u01_from_bits(counter_hash(seed, a, b, c));
}

// Derives an unrelated stream from a seed, for estimators that need
// several independent noise sources per run.
inline uint64_t substream(uint64_t seed, uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

}  // namespace pathhjb
