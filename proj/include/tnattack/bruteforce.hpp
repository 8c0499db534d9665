#pragma once

// Exhaustive key search, in counting order or in a seeded pseudo-random
// permutation of the keyspace. The permutation is a 4-round Feistel network
// on an even bit width with cycle-walking, so it needs O(1) memory.

#include <chrono>
#include <cstdint>
#include <string>

#include "tnattack/cost.hpp"
#include "tnattack/record.hpp"
#include "tnattack/rng.hpp"

namespace tnattack {

inline constexpr std::size_t kMaxBruteForceBits = 32;

enum class BruteOrder { sequential, random_permutation };

inline std::string to_string(BruteOrder o) { return o == BruteOrder::sequential ? "sequential" : "random"; }

class KeyPermutation {
 public:
  KeyPermutation(std::size_t bits, std::uint64_t seed) : bits_(bits) {
    if (bits < 1 || bits > kMaxBruteForceBits) throw ShapeError("KeyPermutation: bits must be in [1, 32]");
    half_ = (bits + 1) / 2;
    for (std::size_t r = 0; r < kRounds; ++r) round_keys_[r] = derive_seed(seed, r);
  }

  std::uint64_t size() const noexcept { return std::uint64_t{1} << bits_; }

  // Bijection on [0, 2^bits).
  std::uint64_t operator()(std::uint64_t index) const {
    if (index >= size()) throw ShapeError("KeyPermutation: index out of range");
    std::uint64_t x = index;
    do x = encrypt(x);
    while (x >= size());
    return x;
  }

 private:
  static constexpr std::size_t kRounds = 4;

  std::uint64_t encrypt(std::uint64_t x) const {
    const std::uint64_t mask = (std::uint64_t{1} << half_) - 1;
    std::uint64_t left = x >> half_, right = x & mask;
    for (std::size_t r = 0; r < kRounds; ++r) {
      const std::uint64_t f = splitmix64(round_keys_[r] ^ right) & mask;
      const std::uint64_t next = left ^ f;
      left = right;
      right = next;
    }
    return (left << half_) | right;
  }

  std::size_t bits_;
  std::size_t half_;
  std::uint64_t round_keys_[kRounds]{};
};

inline AttackRunRecord run_bruteforce(AttackInstance& inst, BruteOrder order, std::uint64_t seed, const TraceSink& trace = {}) {
  const std::size_t k = inst.key_bits();
  if (k > kMaxBruteForceBits) throw ShapeError("run_bruteforce: key length above 32 bits");
  const auto start = std::chrono::steady_clock::now();
  AttackRunRecord rec;
  rec.engine = "brute";
  rec.cipher = inst.cipher().name;
  rec.key_bits = k;
  rec.seed = seed;
  rec.hyperparameters = {{"order", to_string(order)}};
  const KeyPermutation perm(k, seed);
  for (std::uint64_t i = 0; i < perm.size() && !inst.exhausted(); ++i) {
    const std::uint64_t candidate = order == BruteOrder::sequential ? i : perm(i);
    const Evaluation e = inst.evaluate(BitString::from_uint(candidate, k));
    if (trace) trace({inst.iterations(), -1, e.cost, true, 0.0, false});
    if (e.hit) {
      rec.hit = true;
      break;
    }
  }
  rec.iterations = inst.iterations();
  rec.probe_iterations = inst.probe_iterations();
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace tnattack
