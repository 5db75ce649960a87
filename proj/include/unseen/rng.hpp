#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace unseen::rng {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20180710;

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the independent stream identified by (seed, path...). Streams for
/// distinct paths are statistically independent; the same path always yields
/// the same stream.
constexpr std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix(seed);
  for (auto p : path) s = mix(s ^ mix(p + 0x632be59bd9b4e019ULL));
  return s;
}

inline Engine stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return Engine(derive(seed, path));
}

}  // namespace unseen::rng
