#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace mfld {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates neighbouring stream indices
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Per-task generator: seed xor task index, then mixed.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index) { return Rng(mix64(seed ^ mix64(index))); }

// boost distributions give the same sequence on every platform (std ones don't)
using NormalDist = boost::random::normal_distribution<double>;
using UniformDist = boost::random::uniform_real_distribution<double>;

}  // namespace mfld

namespace mfld {

// Counter-based standard normal: a pure function of (seed, sample, coordinate).
// Used where every Monte-Carlo sample must be reproducible on its own.
inline double counter_normal(std::uint64_t seed, std::uint64_t sample, std::uint64_t coord) {
    const std::uint64_t k = mix64(seed ^ mix64(sample * 0x100000001b3ULL + coord));
    const std::uint64_t a = mix64(k), b = mix64(k ^ 0xda942042e4dd58b5ULL);
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace mfld
