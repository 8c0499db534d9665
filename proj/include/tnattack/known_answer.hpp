#pragma once

// Known-answer fixture: one record per line, `cipher key_hex plaintext_hex
// ciphertext_hex`; blank lines and lines starting with '#' are skipped.

#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "tnattack/cipher.hpp"

namespace tnattack {

struct KnownAnswer {
  std::string cipher;
  std::string key_hex;
  std::string plaintext_hex;
  std::string ciphertext_hex;
};

struct KnownAnswerResult {
  KnownAnswer vector;
  std::string actual_hex;
  bool encrypt_ok = false;
  bool decrypt_ok = false;
  bool passed() const { return encrypt_ok && decrypt_ok; }
};

inline std::vector<KnownAnswer> parse_known_answers(std::istream& in) {
  std::vector<KnownAnswer> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    KnownAnswer v;
    std::string extra;
    if (!(fields >> v.cipher >> v.key_hex >> v.plaintext_hex >> v.ciphertext_hex) || (fields >> extra))
      throw ShapeError("known-answer line " + std::to_string(line_no) + ": expected 4 fields");
    out.push_back(std::move(v));
  }
  return out;
}

inline CipherSpec cipher_for_vector(const KnownAnswer& v) {
  // Blowfish keys vary in width; the width is carried by the hex length.
  if (v.cipher == "blowfish") return blowfish_cipher(v.key_hex.size() * 4);
  return cipher_by_name(v.cipher);
}

inline KnownAnswerResult check_known_answer(const KnownAnswer& v) {
  const CipherSpec c = cipher_for_vector(v);
  const BitString key = BitString::from_hex(v.key_hex, c.key_bits);
  const BitString pt = BitString::from_hex(v.plaintext_hex, c.block_bits);
  const BitString ct = BitString::from_hex(v.ciphertext_hex, c.block_bits);
  KnownAnswerResult r{v, {}, false, false};
  const BitString actual = c.encrypt_checked(key, pt);
  r.actual_hex = actual.to_hex();
  r.encrypt_ok = actual == ct;
  r.decrypt_ok = c.decrypt(key, ct) == pt;
  return r;
}

// Copy of tests/data/golden_vectors.txt, used by `tnattack vectors` when no
// file is given.
inline constexpr const char* kBuiltinKnownAnswers = R"(sdes 282 72 77
sdes 376 fb 01
sdes 0f6 7f 08
sdes 1df 5a 1b
sdes 2bd 41 eb
sdes 241 0c e8
sdes 386 fe 3a
saes a73b 6f6b 0738
saes 1601 9bab 2852
saes 6e60 5822 65dc
saes 30fd 7425 d7d4
saes 5a99 135c 0847
saes d598 4ce2 378f
saes 850b 6e99 fb87
blowfish 0000000000000000 0000000000000000 4ef997456198dd78
blowfish ffffffffffffffff ffffffffffffffff 51866fd5b85ecb8a
blowfish 3000000000000000 1000000000000001 7d856f9a613063f2
blowfish 1111111111111111 1111111111111111 2466dd878b963c9d
blowfish 0123456789abcdef 1111111111111111 61f9c3802281b096
blowfish fedcba9876543210 0123456789abcdef 0aceab0fc6a0a28d
blowfish f0e1d2c3 fedcba9876543210 be1e639408640f05
blowfish f0e1d2c3b4a5968778695a4b3c2d1e0f0011223344556677 fedcba9876543210 05044b62fa52d080
)";

}  // namespace tnattack
