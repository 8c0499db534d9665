#pragma once

// Fixed-length binary words. Bit 0 is the most significant bit everywhere in
// this library: from_uint(0b10, 2) has bits {1, 0}, and permutation tables
// index bits 1-based from the left, as printed in cipher textbooks.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tnattack/errors.hpp"

namespace tnattack {

class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length) : bits_(length, 0) {}

  static BitString from_bits(std::span<const int> bits) {
    BitString out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != 0 && bits[i] != 1) throw ShapeError("BitString: bit values must be 0 or 1");
      out.bits_[i] = static_cast<std::uint8_t>(bits[i]);
    }
    return out;
  }

  static BitString from_bits(std::initializer_list<int> bits) {
    std::vector<int> v(bits);
    return from_bits(std::span<const int>(v));
  }

  // "0110" -> {0,1,1,0}
  static BitString parse(std::string_view text) {
    BitString out(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '0') out.bits_[i] = 0;
      else if (text[i] == '1') out.bits_[i] = 1;
      else throw ShapeError("BitString: expected '0' or '1' in '" + std::string(text) + "'");
    }
    return out;
  }

  static BitString from_uint(std::uint64_t value, std::size_t length) {
    if (length > 64) throw ShapeError("BitString::from_uint: length exceeds 64 bits");
    if (length < 64 && (value >> length) != 0)
      throw ShapeError("BitString::from_uint: value does not fit in " + std::to_string(length) + " bits");
    BitString out(length);
    for (std::size_t i = 0; i < length; ++i) out.bits_[i] = (value >> (length - 1 - i)) & 1U;
    return out;
  }

  // Hex text is read as an integer and right-aligned into `length` bits, so
  // "282" with length 10 is 1010000010. Without a length, 4 bits per digit.
  static BitString from_hex(std::string_view hex, std::size_t length) {
    BitString full = from_hex(hex);
    if (full.size() < length) return concat(BitString(length - full.size()), full);
    const std::size_t excess = full.size() - length;
    for (std::size_t i = 0; i < excess; ++i)
      if (full.bits_[i]) throw ShapeError("BitString::from_hex: value does not fit in " + std::to_string(length) + " bits");
    return full.slice(excess, length);
  }

  static BitString from_hex(std::string_view hex) {
    BitString out(hex.size() * 4);
    for (std::size_t i = 0; i < hex.size(); ++i) {
      const int nibble = hex_value(hex[i]);
      for (int b = 0; b < 4; ++b) out.bits_[4 * i + b] = (nibble >> (3 - b)) & 1;
    }
    return out;
  }

  static BitString from_bytes(std::span<const std::uint8_t> bytes) {
    BitString out(bytes.size() * 8);
    for (std::size_t i = 0; i < bytes.size(); ++i)
      for (int b = 0; b < 8; ++b) out.bits_[8 * i + b] = (bytes[i] >> (7 - b)) & 1U;
    return out;
  }

  static BitString concat(const BitString& head, const BitString& tail) {
    BitString out(head.size() + tail.size());
    std::copy(head.bits_.begin(), head.bits_.end(), out.bits_.begin());
    std::copy(tail.bits_.begin(), tail.bits_.end(), out.bits_.begin() + static_cast<std::ptrdiff_t>(head.size()));
    return out;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  int operator[](std::size_t i) const { return bits_[i]; }
  int at(std::size_t i) const {
    if (i >= bits_.size()) throw ShapeError("BitString::at: index out of range");
    return bits_[i];
  }
  void set(std::size_t i, int value) {
    if (i >= bits_.size()) throw ShapeError("BitString::set: index out of range");
    bits_[i] = value ? 1 : 0;
  }

  std::uint64_t to_uint() const {
    if (bits_.size() > 64) throw ShapeError("BitString::to_uint: more than 64 bits");
    std::uint64_t v = 0;
    for (auto b : bits_) v = (v << 1) | b;
    return v;
  }

  // Lowercase, ceil(size/4) digits, value right-aligned.
  std::string to_hex() const {
    const std::size_t digits = (bits_.size() + 3) / 4;
    const std::size_t pad = digits * 4 - bits_.size();
    std::string out(digits, '0');
    for (std::size_t d = 0; d < digits; ++d) {
      int nibble = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t pos = d * 4 + b;
        const int bit = pos < pad ? 0 : bits_[pos - pad];
        nibble = (nibble << 1) | bit;
      }
      out[d] = "0123456789abcdef"[nibble];
    }
    return out;
  }

  std::vector<std::uint8_t> to_bytes() const {
    if (bits_.size() % 8 != 0) throw ShapeError("BitString::to_bytes: length is not a multiple of 8");
    std::vector<std::uint8_t> out(bits_.size() / 8, 0);
    for (std::size_t i = 0; i < bits_.size(); ++i) out[i / 8] = static_cast<std::uint8_t>((out[i / 8] << 1) | bits_[i]);
    return out;
  }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
    return s;
  }

  BitString slice(std::size_t offset, std::size_t count) const {
    if (offset + count > bits_.size()) throw ShapeError("BitString::slice: range out of bounds");
    BitString out(count);
    std::copy_n(bits_.begin() + static_cast<std::ptrdiff_t>(offset), count, out.bits_.begin());
    return out;
  }

  BitString complement() const {
    BitString out(*this);
    for (auto& b : out.bits_) b ^= 1U;
    return out;
  }

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString&, const BitString&) = default;

  friend std::ostream& operator<<(std::ostream& os, const BitString& b) { return os << b.to_string(); }

 private:
  static int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ShapeError(std::string("BitString: invalid hex digit '") + c + "'");
  }

  std::vector<std::uint8_t> bits_;
};

// Applies a 1-based permutation/expansion table.
inline BitString permute_bits(const BitString& in, std::span<const int> table) {
  BitString out(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) out.set(i, in.at(static_cast<std::size_t>(table[i] - 1)));
  return out;
}

}  // namespace tnattack
