#pragma once

#include <cstdint>
#include <random>

namespace covgrad {

/// SplitMix64 finalizer; used to derive independent generator seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Generator for (seed, stream). Distinct streams of one seed are
/// statistically independent, so data, initialization and Monte Carlo
/// chunks never share draws.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace covgrad
