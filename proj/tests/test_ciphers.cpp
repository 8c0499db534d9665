#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "tnattack/cipher.hpp"
#include "tnattack/known_answer.hpp"
#include "tnattack/rng.hpp"

using namespace tnattack;

namespace {

std::vector<KnownAnswer> golden_vectors() {
  std::ifstream in(TNATTACK_TEST_DATA "/golden_vectors.txt");
  EXPECT_TRUE(in.good());
  return parse_known_answers(in);
}

void check_inverse(const CipherSpec& c, int pairs, std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < pairs; ++i) {
    const auto key = random_bits(c.key_bits, rng);
    const auto pt = random_bits(c.block_bits, rng);
    const auto ct = c.encrypt_checked(key, pt);
    ASSERT_EQ(ct.size(), c.block_bits);
    ASSERT_EQ(c.decrypt(key, ct), pt) << c.name << " key=" << key;
    ASSERT_EQ(c.encrypt(key, pt), ct);
  }
}

}  // namespace

TEST(BitString, MsbFirstConversions) {
  const auto b = BitString::from_uint(0b1010000010, 10);
  EXPECT_EQ(b.to_string(), "1010000010");
  EXPECT_EQ(b.to_hex(), "282");
  EXPECT_EQ(BitString::from_hex("282", 10), b);
  EXPECT_EQ(b[0], 1);
  EXPECT_EQ(b.to_uint(), 0b1010000010u);
  EXPECT_THROW(BitString::from_uint(4, 2), ShapeError);
  EXPECT_THROW(BitString::from_hex("fff", 10), ShapeError);
  EXPECT_THROW(BitString::parse("012"), ShapeError);
}

TEST(BitString, IntegerAndHexRoundTrip) {
  Rng rng(7);
  for (std::size_t len = 1; len <= 64; ++len) {
    const auto b = random_bits(len, rng);
    EXPECT_EQ(BitString::from_uint(b.to_uint(), len), b);
    EXPECT_EQ(BitString::from_hex(b.to_hex(), len), b);
    EXPECT_EQ(b.complement().complement(), b);
  }
}

TEST(Sdes, TextbookSubkeysAndWorkedExample) {
  const auto keys = sdes::subkeys(0b1010000010);
  EXPECT_EQ(keys.k1, 0b10100100u);
  EXPECT_EQ(keys.k2, 0b01000011u);
  EXPECT_EQ(sdes::encrypt(BitString::parse("1010000010"), BitString::parse("01110010")), BitString::parse("01110111"));
}

TEST(Sdes, RejectsWrongShapes) {
  EXPECT_THROW(sdes::encrypt(BitString(9), BitString(8)), ShapeError);
  EXPECT_THROW(sdes::encrypt(BitString(10), BitString(16)), ShapeError);
}

TEST(Sdes, DistinctKeysUsuallyGiveDistinctCiphertexts) {
  // Oracle: with 256 possible ciphertexts two independent keys collide
  // about 1/256 of the time; the table-free estimate is the sampled rate.
  Rng rng(11);
  int distinct = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    auto k1 = random_bits(10, rng), k2 = random_bits(10, rng);
    while (k2 == k1) k2 = random_bits(10, rng);
    const auto p = random_bits(8, rng);
    distinct += sdes::encrypt(k1, p) != sdes::encrypt(k2, p);
  }
  EXPECT_GE(distinct, 990);
}

TEST(Saes, PublishedVector) {
  EXPECT_EQ(saes::encrypt_block(0xA73B, 0x6F6B), 0x0738);
  EXPECT_EQ(saes::decrypt_block(0xA73B, 0x0738), 0x6F6B);
  const auto rk = saes::round_keys(0xA73B);
  EXPECT_EQ(rk[1], 0x1C27);
  EXPECT_EQ(rk[2], 0x7651);
}

TEST(Saes, BijectionOnAllBlocks) {
  for (std::uint16_t key : {0x0000, 0xA73B, 0xFFFF}) {
    std::vector<bool> seen(1 << 16, false);
    for (std::uint32_t p = 0; p < (1u << 16); ++p) {
      const auto c = saes::encrypt_block(key, static_cast<std::uint16_t>(p));
      ASSERT_FALSE(seen[c]);
      seen[c] = true;
    }
  }
}

TEST(Blowfish, ZeroKeyZeroBlock) {
  const std::vector<std::uint8_t> key(8, 0);
  EXPECT_EQ(blowfish::KeySchedule(key).encrypt_block(0), 0x4EF997456198DD78ULL);
}

TEST(Blowfish, KeyLengthLimits) {
  EXPECT_THROW(blowfish::encrypt(BitString(24), BitString(64)), ShapeError);
  EXPECT_THROW(blowfish::encrypt(BitString(36), BitString(64)), ShapeError);
  EXPECT_THROW(blowfish::encrypt(BitString(456), BitString(64)), ShapeError);
  EXPECT_THROW(blowfish::encrypt(BitString(32), BitString(32)), ShapeError);
  EXPECT_NO_THROW(blowfish::encrypt(BitString(448), BitString(64)));
}

TEST(Blowfish, KeyScheduleIsDeterministic) {
  const std::vector<std::uint8_t> key = {0xde, 0xad, 0xbe, 0xef};
  EXPECT_EQ(blowfish::KeySchedule(key).p_array(), blowfish::KeySchedule(key).p_array());
}

TEST(Ciphers, GoldenVectorsBitExact) {
  const auto vectors = golden_vectors();
  ASSERT_GE(vectors.size(), 20u);
  for (const auto& v : vectors) {
    const auto r = check_known_answer(v);
    EXPECT_TRUE(r.passed()) << v.cipher << ' ' << v.key_hex << ' ' << v.plaintext_hex << " -> " << r.actual_hex;
  }
}

TEST(Ciphers, BuiltinVectorsMatchFixtureFile) {
  std::istringstream builtin(kBuiltinKnownAnswers);
  const auto b = parse_known_answers(builtin);
  const auto f = golden_vectors();
  for (const auto& v : b) {
    const bool present = std::any_of(f.begin(), f.end(), [&](const KnownAnswer& w) {
      return w.cipher == v.cipher && w.key_hex == v.key_hex && w.plaintext_hex == v.plaintext_hex && w.ciphertext_hex == v.ciphertext_hex;
    });
    EXPECT_TRUE(present) << v.cipher << ' ' << v.key_hex;
  }
}

TEST(Ciphers, InverseProperty) {
  check_inverse(sdes_cipher(), 100, 1);
  check_inverse(saes_cipher(), 100, 2);
  check_inverse(blowfish_cipher(32), 50, 3);
  check_inverse(blowfish_cipher(128), 10, 4);
}

TEST(Ciphers, Registry) {
  EXPECT_EQ(cipher_by_name("sdes").key_bits, 10u);
  EXPECT_EQ(cipher_by_name("saes").block_bits, 16u);
  EXPECT_EQ(cipher_by_name("blowfish").key_bits, 32u);
  EXPECT_EQ(cipher_by_name("blowfish64").key_bits, 64u);
  EXPECT_THROW(cipher_by_name("des"), ShapeError);
  EXPECT_THROW(cipher_by_name("blowfish12"), ShapeError);
}

TEST(ReducedKeyspace, MatchesDirectCall) {
  Rng rng(5);
  const auto base = blowfish_cipher(32);
  for (int i = 0; i < 10; ++i) {
    const auto key = random_bits(32, rng);
    const auto pt = random_bits(64, rng);
    const ReducedKeyspace rk(base, key.slice(0, 8));
    EXPECT_EQ(rk.free_bits(), 24u);
    const auto free = key.slice(8, 24);
    EXPECT_EQ(reduced_encrypt(rk, free, pt), base.encrypt(key, pt));
    const auto view = rk.as_cipher();
    EXPECT_EQ(view.key_bits, 24u);
    EXPECT_EQ(view.encrypt(free, pt), base.encrypt(key, pt));
    EXPECT_EQ(view.decrypt(free, view.encrypt(free, pt)), pt);
  }
}

TEST(ReducedKeyspace, ZeroFreeBitsAndShapeErrors) {
  Rng rng(6);
  const auto key = random_bits(10, rng);
  const auto pt = random_bits(8, rng);
  const ReducedKeyspace full(sdes_cipher(), key);
  EXPECT_EQ(full.free_bits(), 0u);
  EXPECT_EQ(reduced_encrypt(full, BitString(0), pt), sdes::encrypt(key, pt));
  EXPECT_THROW(reduced_encrypt(full, BitString(1), pt), ShapeError);
  EXPECT_THROW(ReducedKeyspace(sdes_cipher(), BitString(11)), ShapeError);
}
