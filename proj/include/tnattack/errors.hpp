#pragma once

#include <stdexcept>
#include <string>

namespace tnattack {

// Wrong length, indivisible grouping, unsupported key size.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A density matrix, tensor network or MPS that cannot be used as a quantum state.
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotFoundError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace tnattack
