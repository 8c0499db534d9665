#pragma once

// Hamming cost and the evaluate-candidate callback shared by every engine.
// One call to AttackInstance::evaluate is one "iteration".

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "tnattack/bitstring.hpp"
#include "tnattack/cipher.hpp"

namespace tnattack {

inline std::size_t hamming_distance(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw ShapeError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += static_cast<std::size_t>(a[i] != b[i]);
  return d;
}

// zero_cost: any key reproducing the target ciphertext counts (what an
// attacker can observe). exact_key: only the planted key counts, the model
// behind the 2^k/2 brute-force baseline.
enum class SuccessRule { zero_cost, exact_key };

enum class EvalKind { sample, probe };

struct Evaluation {
  std::size_t cost = 0;
  bool hit = false;
};

class AttackInstance {
 public:
  // budget == 0 means unlimited.
  AttackInstance(CipherSpec cipher, BitString plaintext, BitString target_ciphertext, std::size_t budget = 0)
      : cipher_(std::move(cipher)), plaintext_(std::move(plaintext)), target_(std::move(target_ciphertext)), budget_(budget) {
    if (plaintext_.size() != cipher_.block_bits || target_.size() != cipher_.block_bits)
      throw ShapeError("AttackInstance: plaintext/ciphertext width does not match the cipher block");
  }

  const CipherSpec& cipher() const noexcept { return cipher_; }
  const BitString& plaintext() const noexcept { return plaintext_; }
  const BitString& target_ciphertext() const noexcept { return target_; }
  std::size_t key_bits() const noexcept { return cipher_.key_bits; }

  std::size_t budget() const noexcept { return budget_; }
  std::size_t iterations() const noexcept { return iterations_; }
  std::size_t probe_iterations() const noexcept { return probes_; }
  bool exhausted() const noexcept { return budget_ != 0 && iterations_ >= budget_; }
  bool solved() const noexcept { return found_.has_value(); }
  const std::optional<BitString>& found_key() const noexcept { return found_; }

  Evaluation evaluate(const BitString& candidate, EvalKind kind = EvalKind::sample) {
    if (candidate.size() != cipher_.key_bits) throw ShapeError("evaluate_candidate: candidate key has the wrong length");
    if (exhausted()) throw std::logic_error("evaluate_candidate: evaluation budget exhausted");
    ++iterations_;
    if (kind == EvalKind::probe) ++probes_;
    Evaluation e;
    e.cost = hamming_distance(cipher_.encrypt(candidate, plaintext_), target_);
    e.hit = e.cost == 0 && (!accept_ || accept_(candidate));
    if (e.hit && !found_) found_ = candidate;
    return e;
  }

  // Harness-side hook; engines never see what the predicate closes over.
  void set_success_predicate(std::function<bool(const BitString&)> accept) { accept_ = std::move(accept); }

 private:
  CipherSpec cipher_;
  BitString plaintext_;
  BitString target_;
  std::size_t budget_;
  std::size_t iterations_ = 0;
  std::size_t probes_ = 0;
  std::optional<BitString> found_;
  std::function<bool(const BitString&)> accept_;
};

// Evaluation budget used when neither the instance nor the engine sets one.
inline std::size_t default_budget(std::size_t key_bits) {
  return key_bits >= 61 ? std::numeric_limits<std::size_t>::max() : (std::size_t{4} << key_bits);
}

inline Evaluation evaluate_candidate(AttackInstance& inst, const BitString& candidate, EvalKind kind = EvalKind::sample) {
  return inst.evaluate(candidate, kind);
}

// An instance together with the key that produced it. Only test and
// benchmark code holds one of these.
struct PlantedInstance {
  AttackInstance instance;
  BitString secret_key;
};

inline PlantedInstance plant_instance(const CipherSpec& cipher, const BitString& secret_key, const BitString& plaintext,
                                      std::size_t budget = 0, SuccessRule rule = SuccessRule::zero_cost) {
  BitString target = cipher.encrypt_checked(secret_key, plaintext);
  PlantedInstance planted{AttackInstance(cipher, plaintext, std::move(target), budget), secret_key};
  if (rule == SuccessRule::exact_key)
    planted.instance.set_success_predicate([secret = secret_key](const BitString& k) { return k == secret; });
  return planted;
}

}  // namespace tnattack
