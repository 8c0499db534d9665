#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace tnattack {

using Hyperparameters = std::map<std::string, std::string>;

// Shortest text that parses back to the same double.
inline std::string hyperparameter_value(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Outcome of one independent attack attempt.
struct AttackRunRecord {
  std::string engine;
  std::string cipher;
  std::size_t key_bits = 0;
  std::size_t attempt = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;        // cipher evaluations, probes included
  std::size_t probe_iterations = 0;  // the gradient-probe share of `iterations`
  double wall_time = 0.0;            // seconds
  bool hit = false;
  std::size_t resets = 0;
  Hyperparameters hyperparameters;
  std::string error;                        // set when the attempt threw
  std::optional<std::string> secret_key_hex;  // only with the debug flag

  friend bool operator==(const AttackRunRecord&, const AttackRunRecord&) = default;
};

// One line of an attack trace.
struct TraceEvent {
  std::size_t iteration = 0;
  std::ptrdiff_t site = -1;  // link or qubit index, -1 when not applicable
  std::size_t cost = 0;
  bool accepted = false;
  double gradient_norm = 0.0;
  bool reset = false;
};

using TraceSink = std::function<void(const TraceEvent&)>;

}  // namespace tnattack
