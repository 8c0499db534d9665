#include <gtest/gtest.h>

#include <vector>

#include "tnattack/bruteforce.hpp"

using namespace tnattack;

TEST(KeyPermutation, IsBijectionUpTo16Bits) {
  for (std::size_t bits = 1; bits <= 16; ++bits) {
    const KeyPermutation p(bits, 1234 + bits);
    std::vector<bool> seen(p.size(), false);
    for (std::uint64_t i = 0; i < p.size(); ++i) {
      const auto v = p(i);
      ASSERT_LT(v, p.size());
      ASSERT_FALSE(seen[v]) << bits;
      seen[v] = true;
    }
  }
}

TEST(KeyPermutation, SeedsGiveDifferentOrders) {
  const KeyPermutation a(10, 1), b(10, 2);
  int same = 0;
  for (std::uint64_t i = 0; i < 1024; ++i) same += a(i) == b(i);
  EXPECT_LT(same, 20);
  EXPECT_THROW(KeyPermutation(33, 0), ShapeError);
  EXPECT_THROW(a(1024), ShapeError);
}

TEST(BruteForce, SequentialAllZeroKeyTakesOneIteration) {
  auto p = plant_instance(sdes_cipher(), BitString(10), BitString::parse("10101010"), 0, SuccessRule::exact_key);
  const auto rec = run_bruteforce(p.instance, BruteOrder::sequential, 0);
  EXPECT_TRUE(rec.hit);
  EXPECT_EQ(rec.iterations, 1u);
}

TEST(BruteForce, AlwaysHitsWithinKeyspace) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto key = random_bits(10, rng);
    auto p = plant_instance(sdes_cipher(), key, random_bits(8, rng), 0, SuccessRule::exact_key);
    const auto rec = run_bruteforce(p.instance, BruteOrder::random_permutation, 100 + t);
    EXPECT_TRUE(rec.hit);
    EXPECT_LE(rec.iterations, 1024u);
    EXPECT_EQ(*p.instance.found_key(), key);
  }
}

TEST(BruteForce, SequentialIterationsEqualKeyIndexPlusOne) {
  auto p = plant_instance(saes_cipher(), BitString::from_uint(777, 16), BitString::from_uint(0x1234, 16), 0, SuccessRule::exact_key);
  EXPECT_EQ(run_bruteforce(p.instance, BruteOrder::sequential, 0).iterations, 778u);
}

TEST(BruteForce, RespectsBudget) {
  auto p = plant_instance(sdes_cipher(), BitString::from_uint(1023, 10), BitString(8), 10, SuccessRule::exact_key);
  const auto rec = run_bruteforce(p.instance, BruteOrder::sequential, 0);
  EXPECT_FALSE(rec.hit);
  EXPECT_EQ(rec.iterations, 10u);
}
