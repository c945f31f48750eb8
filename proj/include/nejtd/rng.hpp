#pragma once

// Counter-based random numbers. A trial owns a 64-bit key; the integration
// step index is the counter, and block `c` of stream `key` is
// SplitMix64(key + c * gamma). Any step's draws can be regenerated without
// replaying the stream, and the computation is branch-free so it runs inside
// the vectorized lane loop.

#include <cmath>
#include <cstdint>

#include "nejtd/vmath.hpp"

namespace nejtd {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += kGoldenGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t counter_bits(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + counter * kGoldenGamma);
}

/// Per-trial key derived from (master seed, trial index).
inline constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    return mix64(mix64(master_seed) ^ mix64(trial_index + 0x632BE59BD9B4E019ULL));
}

/// Independent auxiliary stream of a trial (e.g. for its start-state draw).
inline constexpr std::uint64_t substream_key(std::uint64_t key, std::uint64_t stream) {
    return mix64(key ^ mix64(stream ^ 0xD1B54A32D192ED03ULL));
}

struct NormalPair {
    double first;
    double second;
};

/// Uniform in (0, 1] from the top 53 bits.
inline double uniform_open0(std::uint64_t bits) {
    return static_cast<double>(static_cast<std::int64_t>((bits >> 11) + 1)) * 0x1.0p-53;
}

/// Two independent standard normals (Box-Muller) from counter block pair
/// (2c, 2c+1). Every integration step consumes exactly one pair.
inline NormalPair normal_pair(std::uint64_t key, std::uint64_t counter) {
    constexpr double two_pi = 6.28318530717958647692;
    const double u1 = uniform_open0(counter_bits(key, 2 * counter));
    const double u2 = uniform_open0(counter_bits(key, 2 * counter + 1));
    const double r = std::sqrt(-2.0 * vmath::log(u1));
    double s, c;
    vmath::sincos(two_pi * u2, s, c);
    return {r * c, r * s};
}

}  // namespace nejtd
