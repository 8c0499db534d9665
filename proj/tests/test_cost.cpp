#include <gtest/gtest.h>

#include "tnattack/cost.hpp"
#include "tnattack/rng.hpp"

using namespace tnattack;

TEST(HammingDistance, HandCounts) {
  EXPECT_EQ(hamming_distance(BitString::parse("0000"), BitString::parse("0000")), 0u);
  EXPECT_EQ(hamming_distance(BitString::parse("1011101"), BitString::parse("1001001")), 2u);
  EXPECT_THROW(hamming_distance(BitString(3), BitString(4)), ShapeError);
}

TEST(HammingDistance, ComplementDiffersEverywhere) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_bits(1 + static_cast<std::size_t>(i), rng);
    EXPECT_EQ(hamming_distance(a, a.complement()), a.size());
  }
}

TEST(HammingDistance, MetricAxiomsOnRandomTriples) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_bits(24, rng), b = random_bits(24, rng), c = random_bits(24, rng);
    EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
    EXPECT_EQ(hamming_distance(a, b) == 0, a == b);
    EXPECT_LE(hamming_distance(a, c), hamming_distance(a, b) + hamming_distance(b, c));
    EXPECT_EQ(hamming_distance(a, a), 0u);
  }
}

TEST(EvaluateCandidate, ExactKeyHitsAndCounts) {
  Rng rng(3);
  const auto key = random_bits(10, rng);
  auto planted = plant_instance(sdes_cipher(), key, random_bits(8, rng));
  auto& inst = planted.instance;
  const auto e = evaluate_candidate(inst, key);
  EXPECT_EQ(e.cost, 0u);
  EXPECT_TRUE(e.hit);
  EXPECT_EQ(inst.iterations(), 1u);
  evaluate_candidate(inst, key.complement());
  evaluate_candidate(inst, key.complement(), EvalKind::probe);
  EXPECT_EQ(inst.iterations(), 3u);
  EXPECT_EQ(inst.probe_iterations(), 1u);
  ASSERT_TRUE(inst.found_key().has_value());
  EXPECT_EQ(*inst.found_key(), key);
  EXPECT_THROW(evaluate_candidate(inst, BitString(9)), ShapeError);
}

TEST(EvaluateCandidate, ExhaustiveSdesCostHasZeroMinimum) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto key = random_bits(10, rng);
    auto planted = plant_instance(sdes_cipher(), key, random_bits(8, rng));
    std::size_t min_cost = 99, zero_keys = 0;
    for (std::uint64_t k = 0; k < 1024; ++k) {
      const auto e = planted.instance.evaluate(BitString::from_uint(k, 10));
      min_cost = std::min(min_cost, e.cost);
      zero_keys += e.cost == 0;
      EXPECT_EQ(e.hit, e.cost == 0);
    }
    EXPECT_EQ(min_cost, 0u);
    EXPECT_GE(zero_keys, 1u);
    EXPECT_EQ(planted.instance.iterations(), 1024u);
  }
}

TEST(EvaluateCandidate, ExactKeyRuleRejectsCollidingKeys) {
  // Find an S-DES (key, plaintext) with a second key that maps to the same
  // ciphertext; under the exact-key rule only the planted key is a hit.
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto key = random_bits(10, rng);
    const auto pt = random_bits(8, rng);
    auto planted = plant_instance(sdes_cipher(), key, pt, 0, SuccessRule::exact_key);
    for (std::uint64_t k = 0; k < 1024; ++k) {
      const auto cand = BitString::from_uint(k, 10);
      if (cand == key) continue;
      const auto e = planted.instance.evaluate(cand);
      if (e.cost == 0) {
        EXPECT_FALSE(e.hit);
        EXPECT_TRUE(planted.instance.evaluate(key).hit);
        return;
      }
    }
  }
  FAIL() << "no colliding S-DES key found";
}

TEST(EvaluateCandidate, BudgetIsEnforced) {
  auto planted = plant_instance(sdes_cipher(), BitString(10), BitString(8), 2);
  planted.instance.evaluate(BitString(10).complement());
  EXPECT_FALSE(planted.instance.exhausted());
  planted.instance.evaluate(BitString(10).complement());
  EXPECT_TRUE(planted.instance.exhausted());
  EXPECT_THROW(planted.instance.evaluate(BitString(10)), std::logic_error);
}
