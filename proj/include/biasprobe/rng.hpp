#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace biasprobe {

// All randomness in the project flows from one master seed. Substreams are
// derived by mixing the master seed with a stream tag through splitmix64, so
// parallel and serial execution consume identical streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x632be59bd9b4e019ULL + 1));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
    return Rng(derive_seed(master, stream));
}

/// Uniform double in [0,1).
inline double uniform01(Rng& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; one value per call, no cached state.
inline double gaussian(Rng& rng) {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform01(rng);
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace biasprobe
