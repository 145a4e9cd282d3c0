#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace simm {

using Rng = std::mt19937_64;

/// Seed used by every command when none is given.
inline constexpr std::uint64_t kDefaultSeed = 1234;

/// Independent stream for (seed, ids...), e.g. (seed, group, chain).
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

}  // namespace simm
