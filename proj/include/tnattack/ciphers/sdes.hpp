#pragma once

// Simplified DES: 10-bit key, 8-bit block, two Feistel rounds. Tables are the
// standard textbook ones (P10, P8, IP, EP, P4, S0, S1), 1-based, MSB-first.

#include <array>
#include <cstdint>

#include "tnattack/bitstring.hpp"

namespace tnattack::sdes {

inline constexpr std::array<int, 10> kP10 = {3, 5, 2, 7, 4, 10, 1, 9, 8, 6};
inline constexpr std::array<int, 8> kP8 = {6, 3, 7, 4, 8, 5, 10, 9};
inline constexpr std::array<int, 8> kIP = {2, 6, 3, 1, 4, 8, 5, 7};
inline constexpr std::array<int, 8> kIPInverse = {4, 1, 3, 5, 7, 2, 8, 6};
inline constexpr std::array<int, 8> kEP = {4, 1, 2, 3, 2, 3, 4, 1};
inline constexpr std::array<int, 4> kP4 = {2, 4, 3, 1};
inline constexpr std::array<std::array<int, 4>, 4> kS0 = {{{1, 0, 3, 2}, {3, 2, 1, 0}, {0, 2, 1, 3}, {3, 1, 3, 2}}};
inline constexpr std::array<std::array<int, 4>, 4> kS1 = {{{0, 1, 2, 3}, {2, 0, 1, 3}, {3, 0, 1, 0}, {2, 1, 0, 3}}};

namespace detail {

// Permutes the low `in_bits` bits of `value` (MSB-first numbering).
template <std::size_t N>
constexpr std::uint32_t permute(std::uint32_t value, int in_bits, const std::array<int, N>& table) {
  std::uint32_t out = 0;
  for (int pos : table) out = (out << 1) | ((value >> (in_bits - pos)) & 1U);
  return out;
}

constexpr std::uint32_t rotl5(std::uint32_t half, int n) { return ((half << n) | (half >> (5 - n))) & 0x1FU; }

constexpr std::uint32_t sbox(const std::array<std::array<int, 4>, 4>& box, std::uint32_t nibble) {
  const std::uint32_t row = ((nibble >> 2) & 2U) | (nibble & 1U);
  const std::uint32_t col = (nibble >> 1) & 3U;
  return static_cast<std::uint32_t>(box[row][col]);
}

constexpr std::uint32_t fk(std::uint32_t block, std::uint32_t subkey) {
  const std::uint32_t left = block >> 4;
  const std::uint32_t right = block & 0xFU;
  const std::uint32_t x = permute(right, 4, kEP) ^ subkey;
  const std::uint32_t s = (sbox(kS0, x >> 4) << 2) | sbox(kS1, x & 0xFU);
  return ((left ^ permute(s, 4, kP4)) << 4) | right;
}

}  // namespace detail

struct Subkeys {
  std::uint32_t k1;
  std::uint32_t k2;
};

constexpr Subkeys subkeys(std::uint32_t key10) {
  const std::uint32_t p = detail::permute(key10, 10, kP10);
  std::uint32_t left = detail::rotl5(p >> 5, 1);
  std::uint32_t right = detail::rotl5(p & 0x1FU, 1);
  const std::uint32_t k1 = detail::permute((left << 5) | right, 10, kP8);
  left = detail::rotl5(left, 2);
  right = detail::rotl5(right, 2);
  const std::uint32_t k2 = detail::permute((left << 5) | right, 10, kP8);
  return {k1, k2};
}

constexpr std::uint32_t encrypt_block(std::uint32_t key10, std::uint32_t block8, bool decrypt = false) {
  auto [k1, k2] = subkeys(key10);
  if (decrypt) std::swap(k1, k2);
  std::uint32_t b = detail::permute(block8, 8, kIP);
  b = detail::fk(b, k1);
  b = ((b & 0xFU) << 4) | (b >> 4);
  b = detail::fk(b, k2);
  return detail::permute(b, 8, kIPInverse);
}

inline BitString encrypt(const BitString& key, const BitString& plaintext) {
  if (key.size() != 10 || plaintext.size() != 8) throw ShapeError("sdes: expects a 10-bit key and an 8-bit block");
  return BitString::from_uint(encrypt_block(static_cast<std::uint32_t>(key.to_uint()), static_cast<std::uint32_t>(plaintext.to_uint())), 8);
}

inline BitString decrypt(const BitString& key, const BitString& ciphertext) {
  if (key.size() != 10 || ciphertext.size() != 8) throw ShapeError("sdes: expects a 10-bit key and an 8-bit block");
  return BitString::from_uint(encrypt_block(static_cast<std::uint32_t>(key.to_uint()), static_cast<std::uint32_t>(ciphertext.to_uint()), true), 8);
}

}  // namespace tnattack::sdes
