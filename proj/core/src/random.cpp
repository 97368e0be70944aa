// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/random.hpp"

namespace raretype {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Seed derive_seed(Seed master, std::uint64_t stream) noexcept {
  return Seed{mix64(mix64(master.value) ^ mix64(stream + 0x632be59bd9b4e019ULL))};
}

Seed derive_seed(Seed master, std::uint64_t stream, std::uint64_t substream) noexcept {
  return derive_seed(derive_seed(master, stream), substream);
}

Rng make_rng(Seed seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.value),
                    static_cast<std::uint32_t>(seed.value >> 32)};
  return Rng(seq);
}

}  // namespace raretype
