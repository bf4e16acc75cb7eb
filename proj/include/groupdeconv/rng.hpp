#pragma once

#include <cstdint>
#include <random>

namespace groupdeconv {

//! SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t
mix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Seed of substream `index` under `seed`. Order-sensitive in its arguments.
constexpr std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept
{
  return derive_seed(derive_seed(seed, a), b);
}

using Engine = std::mt19937_64;

inline Engine
make_engine(std::uint64_t seed)
{
  std::seed_seq seq{ static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(mix64(seed)),
                     static_cast<std::uint32_t>(mix64(seed) >> 32) };
  return Engine(seq);
}

//! Uniform draw on the open interval (0, 1), 53 bits.
inline double
open_uniform(Engine& engine)
{
  for (;;) {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    if (u > 0.0)
      return u;
  }
}

} // namespace groupdeconv
