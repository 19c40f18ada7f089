#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nystrom {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent stream key from a base seed and a list of counters
/// (trial index, grid cell, region id, ...). Same inputs give the same key on
/// every thread and every run.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> counters);

/// Engine for one keyed stream.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  return std::mt19937_64(derive_seed(seed, counters));
}

}  // namespace nystrom
