#pragma once

// Blowfish, 16 rounds, keys of 32..448 bits in whole bytes.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tnattack/bitstring.hpp"
#include "tnattack/ciphers/blowfish_pi.hpp"

namespace tnattack::blowfish {

inline constexpr std::size_t kMinKeyBits = 32;
inline constexpr std::size_t kMaxKeyBits = 448;

class KeySchedule {
 public:
  explicit KeySchedule(std::span<const std::uint8_t> key) : p_(blowfish_detail::kInitialP), s_(blowfish_detail::kInitialS) {
    if (key.size() * 8 < kMinKeyBits || key.size() * 8 > kMaxKeyBits)
      throw ShapeError("blowfish: key must be 32..448 bits in whole bytes");
    std::size_t pos = 0;
    for (auto& entry : p_) {
      std::uint32_t word = 0;
      for (int b = 0; b < 4; ++b) {
        word = (word << 8) | key[pos];
        pos = (pos + 1) % key.size();
      }
      entry ^= word;
    }
    std::uint32_t left = 0, right = 0;
    for (std::size_t i = 0; i < p_.size(); i += 2) {
      encrypt_words(left, right);
      p_[i] = left;
      p_[i + 1] = right;
    }
    for (auto& box : s_) {
      for (std::size_t i = 0; i < box.size(); i += 2) {
        encrypt_words(left, right);
        box[i] = left;
        box[i + 1] = right;
      }
    }
  }

  void encrypt_words(std::uint32_t& left, std::uint32_t& right) const noexcept {
    for (int round = 0; round < 16; ++round) {
      left ^= p_[static_cast<std::size_t>(round)];
      right ^= feistel(left);
      std::swap(left, right);
    }
    std::swap(left, right);
    right ^= p_[16];
    left ^= p_[17];
  }

  void decrypt_words(std::uint32_t& left, std::uint32_t& right) const noexcept {
    for (int round = 17; round > 1; --round) {
      left ^= p_[static_cast<std::size_t>(round)];
      right ^= feistel(left);
      std::swap(left, right);
    }
    std::swap(left, right);
    right ^= p_[1];
    left ^= p_[0];
  }

  std::uint64_t encrypt_block(std::uint64_t block) const noexcept {
    auto left = static_cast<std::uint32_t>(block >> 32);
    auto right = static_cast<std::uint32_t>(block);
    encrypt_words(left, right);
    return (static_cast<std::uint64_t>(left) << 32) | right;
  }

  std::uint64_t decrypt_block(std::uint64_t block) const noexcept {
    auto left = static_cast<std::uint32_t>(block >> 32);
    auto right = static_cast<std::uint32_t>(block);
    decrypt_words(left, right);
    return (static_cast<std::uint64_t>(left) << 32) | right;
  }

  const std::array<std::uint32_t, 18>& p_array() const noexcept { return p_; }

 private:
  std::uint32_t feistel(std::uint32_t x) const noexcept {
    const std::uint32_t a = s_[0][x >> 24];
    const std::uint32_t b = s_[1][(x >> 16) & 0xFF];
    const std::uint32_t c = s_[2][(x >> 8) & 0xFF];
    const std::uint32_t d = s_[3][x & 0xFF];
    return ((a + b) ^ c) + d;
  }

  std::array<std::uint32_t, 18> p_;
  std::array<std::array<std::uint32_t, 256>, 4> s_;
};

inline void check_key_bits(std::size_t bits) {
  if (bits < kMinKeyBits || bits > kMaxKeyBits || bits % 8 != 0)
    throw ShapeError("blowfish: key must be 32..448 bits and a multiple of 8");
}

inline BitString encrypt(const BitString& key, const BitString& plaintext) {
  check_key_bits(key.size());
  if (plaintext.size() != 64) throw ShapeError("blowfish: expects a 64-bit block");
  const auto bytes = key.to_bytes();
  return BitString::from_uint(KeySchedule(bytes).encrypt_block(plaintext.to_uint()), 64);
}

inline BitString decrypt(const BitString& key, const BitString& ciphertext) {
  check_key_bits(key.size());
  if (ciphertext.size() != 64) throw ShapeError("blowfish: expects a 64-bit block");
  const auto bytes = key.to_bytes();
  return BitString::from_uint(KeySchedule(bytes).decrypt_block(ciphertext.to_uint()), 64);
}

}  // namespace tnattack::blowfish
