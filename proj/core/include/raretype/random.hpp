// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <random>

namespace raretype {

struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

using Rng = std::mt19937_64;

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Child seed for an independent stream. Depends only on (master, stream), never on
// scheduling, so parallel replicates stay reproducible.
Seed derive_seed(Seed master, std::uint64_t stream) noexcept;
Seed derive_seed(Seed master, std::uint64_t stream, std::uint64_t substream) noexcept;

Rng make_rng(Seed seed);

inline double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace raretype
