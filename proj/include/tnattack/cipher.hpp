#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tnattack/bitstring.hpp"
#include "tnattack/ciphers/blowfish.hpp"
#include "tnattack/ciphers/saes.hpp"
#include "tnattack/ciphers/sdes.hpp"

namespace tnattack {

using BlockFunction = std::function<BitString(const BitString& key, const BitString& block)>;

// A named block cipher with fixed key and block widths.
struct CipherSpec {
  std::string name;
  std::size_t key_bits = 0;
  std::size_t block_bits = 0;
  BlockFunction encrypt;
  BlockFunction decrypt;

  BitString encrypt_checked(const BitString& key, const BitString& plaintext) const {
    if (key.size() != key_bits) throw ShapeError(name + ": expected a " + std::to_string(key_bits) + "-bit key");
    if (plaintext.size() != block_bits) throw ShapeError(name + ": expected a " + std::to_string(block_bits) + "-bit block");
    return encrypt(key, plaintext);
  }
};

inline CipherSpec sdes_cipher() { return {"sdes", 10, 8, sdes::encrypt, sdes::decrypt}; }
inline CipherSpec saes_cipher() { return {"saes", 16, 16, saes::encrypt, saes::decrypt}; }

inline CipherSpec blowfish_cipher(std::size_t key_bits = 32) {
  blowfish::check_key_bits(key_bits);
  return {"blowfish", key_bits, 64, blowfish::encrypt, blowfish::decrypt};
}

// Searches only the trailing free bits of the base cipher's key; the leading
// bits are fixed to a known prefix.
class ReducedKeyspace {
 public:
  ReducedKeyspace(CipherSpec base, BitString fixed_prefix) : base_(std::move(base)), prefix_(std::move(fixed_prefix)) {
    if (prefix_.size() > base_.key_bits) throw ShapeError("ReducedKeyspace: prefix longer than the key");
  }

  const CipherSpec& base() const noexcept { return base_; }
  const BitString& fixed_prefix() const noexcept { return prefix_; }
  std::size_t free_bits() const noexcept { return base_.key_bits - prefix_.size(); }

  BitString expand(const BitString& free_key) const {
    if (free_key.size() != free_bits())
      throw ShapeError("ReducedKeyspace: expected " + std::to_string(free_bits()) + " free key bits");
    return BitString::concat(prefix_, free_key);
  }

  BitString encrypt(const BitString& free_key, const BitString& plaintext) const {
    return base_.encrypt_checked(expand(free_key), plaintext);
  }

  // View as an ordinary cipher over the free bits.
  CipherSpec as_cipher() const {
    auto self = std::make_shared<ReducedKeyspace>(*this);
    return {base_.name + "/" + std::to_string(free_bits()), free_bits(), base_.block_bits,
            [self](const BitString& k, const BitString& p) { return self->encrypt(k, p); },
            [self](const BitString& k, const BitString& c) { return self->base_.decrypt(self->expand(k), c); }};
  }

 private:
  CipherSpec base_;
  BitString prefix_;
};

inline BitString reduced_encrypt(const ReducedKeyspace& rk, const BitString& free_key, const BitString& plaintext) {
  return rk.encrypt(free_key, plaintext);
}

// "sdes", "saes", "blowfish" (32-bit key) or "blowfish<bits>", e.g. "blowfish64".
inline CipherSpec cipher_by_name(const std::string& name) {
  if (name == "sdes") return sdes_cipher();
  if (name == "saes") return saes_cipher();
  if (name == "blowfish") return blowfish_cipher(32);
  if (name.rfind("blowfish", 0) == 0) {
    try {
      return blowfish_cipher(static_cast<std::size_t>(std::stoul(name.substr(8))));
    } catch (const std::logic_error&) {
    }
  }
  throw ShapeError("unknown cipher '" + name + "'");
}

inline std::vector<std::string> cipher_names() { return {"sdes", "saes", "blowfish"}; }

}  // namespace tnattack
