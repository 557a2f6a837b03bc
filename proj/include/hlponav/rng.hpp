#pragma once
#include <cstdint>
#include <random>

namespace hlponav {

// splitmix64; used for stable per-key noise draws and seed derivation.
inline uint64_t hash_mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return hash_mix(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Uniform in [0,1) from a hashed key, with no generator state.
inline double hash_uniform(uint64_t key) {
    return double(hash_mix(key) >> 11) * (1.0 / 9007199254740992.0);
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed, uint64_t stream = 0) {
    return Rng(hash_combine(seed, stream));
}

inline double uniform(Rng& g, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uniform_int(Rng& g, int lo, int hi) { // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline double normal(Rng& g, double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(g);
}

} // namespace hlponav
