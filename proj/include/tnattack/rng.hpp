#pragma once

#include <cstdint>
#include <random>

#include "tnattack/bitstring.hpp"

namespace tnattack {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent seeds from (seed, stream).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline BitString random_bits(std::size_t n, Rng& rng) {
  BitString out(n);
  std::uniform_int_distribution<int> bit(0, 1);
  for (std::size_t i = 0; i < n; ++i) out.set(i, bit(rng));
  return out;
}

}  // namespace tnattack
