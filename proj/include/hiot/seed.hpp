#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hiot {

/// Derives an independent stream seed from the run seed and a stage tag:
/// splitmix64(seed ^ fnv1a64(tag)). Every random draw in the pipeline is
/// rooted in one run seed through this function.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw. Used instead of
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Unbiased integer in [0, bound) by rejection.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

}  // namespace hiot
