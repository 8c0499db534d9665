#pragma once

// Simplified AES (Musa, Schaefer, Wedig): 16-bit key and block, two rounds,
// arithmetic in GF(2^4) modulo x^4 + x + 1. The state is read column-major
// from the block: nibbles n0 n1 n2 n3 form [[n0, n2], [n1, n3]].

#include <array>
#include <cstdint>

#include "tnattack/bitstring.hpp"

namespace tnattack::saes {

inline constexpr std::array<std::uint8_t, 16> kSBox = {0x9, 0x4, 0xA, 0xB, 0xD, 0x1, 0x8, 0x5,
                                                       0x6, 0x2, 0x0, 0x3, 0xC, 0xE, 0xF, 0x7};
inline constexpr std::array<std::uint8_t, 16> kInverseSBox = {0xA, 0x5, 0x9, 0xB, 0x1, 0x7, 0x8, 0xF,
                                                              0x6, 0x0, 0x2, 0x3, 0xC, 0x4, 0xD, 0xE};
inline constexpr std::uint8_t kRcon1 = 0x80;
inline constexpr std::uint8_t kRcon2 = 0x30;

namespace detail {

constexpr std::uint8_t gf16_mul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t r = 0;
  for (int i = 0; i < 4; ++i) {
    if (b & 1U) r ^= a;
    b >>= 1;
    a = static_cast<std::uint8_t>(a << 1);
    if (a & 0x10U) a ^= 0x13U;
  }
  return r & 0xFU;
}

constexpr std::uint8_t sub_byte(std::uint8_t b) {
  return static_cast<std::uint8_t>((kSBox[b >> 4] << 4) | kSBox[b & 0xFU]);
}

constexpr std::uint8_t rot_nib(std::uint8_t b) { return static_cast<std::uint8_t>((b << 4) | (b >> 4)); }

constexpr std::uint16_t substitute(std::uint16_t s, const std::array<std::uint8_t, 16>& box) {
  return static_cast<std::uint16_t>((box[(s >> 12) & 0xF] << 12) | (box[(s >> 8) & 0xF] << 8) |
                                    (box[(s >> 4) & 0xF] << 4) | box[s & 0xF]);
}

// Swaps the two nibbles of the second row (n1 and n3).
constexpr std::uint16_t shift_rows(std::uint16_t s) {
  return static_cast<std::uint16_t>((s & 0xF0F0U) | ((s & 0x000FU) << 8) | ((s >> 8) & 0x000FU));
}

// Each column [a; b] -> [[d, o], [o, d]] * [a; b].
constexpr std::uint16_t mix_columns(std::uint16_t s, std::uint8_t diag, std::uint8_t off) {
  std::array<std::uint8_t, 4> n = {static_cast<std::uint8_t>((s >> 12) & 0xF), static_cast<std::uint8_t>((s >> 8) & 0xF),
                                   static_cast<std::uint8_t>((s >> 4) & 0xF), static_cast<std::uint8_t>(s & 0xF)};
  std::array<std::uint8_t, 4> m{};
  for (int c = 0; c < 2; ++c) {
    m[2 * c] = gf16_mul(diag, n[2 * c]) ^ gf16_mul(off, n[2 * c + 1]);
    m[2 * c + 1] = gf16_mul(off, n[2 * c]) ^ gf16_mul(diag, n[2 * c + 1]);
  }
  return static_cast<std::uint16_t>((m[0] << 12) | (m[1] << 8) | (m[2] << 4) | m[3]);
}

}  // namespace detail

constexpr std::array<std::uint16_t, 3> round_keys(std::uint16_t key) {
  const auto w0 = static_cast<std::uint8_t>(key >> 8);
  const auto w1 = static_cast<std::uint8_t>(key & 0xFF);
  const auto w2 = static_cast<std::uint8_t>(w0 ^ kRcon1 ^ detail::sub_byte(detail::rot_nib(w1)));
  const auto w3 = static_cast<std::uint8_t>(w2 ^ w1);
  const auto w4 = static_cast<std::uint8_t>(w2 ^ kRcon2 ^ detail::sub_byte(detail::rot_nib(w3)));
  const auto w5 = static_cast<std::uint8_t>(w4 ^ w3);
  return {key, static_cast<std::uint16_t>((w2 << 8) | w3), static_cast<std::uint16_t>((w4 << 8) | w5)};
}

constexpr std::uint16_t encrypt_block(std::uint16_t key, std::uint16_t block) {
  const auto k = round_keys(key);
  std::uint16_t s = block ^ k[0];
  s = detail::mix_columns(detail::shift_rows(detail::substitute(s, kSBox)), 1, 4) ^ k[1];
  s = detail::shift_rows(detail::substitute(s, kSBox)) ^ k[2];
  return s;
}

constexpr std::uint16_t decrypt_block(std::uint16_t key, std::uint16_t block) {
  const auto k = round_keys(key);
  std::uint16_t s = detail::substitute(detail::shift_rows(block ^ k[2]), kInverseSBox);
  s = detail::substitute(detail::shift_rows(detail::mix_columns(s ^ k[1], 9, 2)), kInverseSBox);
  return s ^ k[0];
}

inline BitString encrypt(const BitString& key, const BitString& plaintext) {
  if (key.size() != 16 || plaintext.size() != 16) throw ShapeError("saes: expects a 16-bit key and a 16-bit block");
  return BitString::from_uint(encrypt_block(static_cast<std::uint16_t>(key.to_uint()), static_cast<std::uint16_t>(plaintext.to_uint())), 16);
}

inline BitString decrypt(const BitString& key, const BitString& ciphertext) {
  if (key.size() != 16 || ciphertext.size() != 16) throw ShapeError("saes: expects a 16-bit key and a 16-bit block");
  return BitString::from_uint(decrypt_block(static_cast<std::uint16_t>(key.to_uint()), static_cast<std::uint16_t>(ciphertext.to_uint())), 16);
}

}  // namespace tnattack::saes
