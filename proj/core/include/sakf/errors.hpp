#pragma once

#include <stdexcept>
#include <string>

namespace sakf {

// Invalid or unsupported configuration value (maps to CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent sizes between arguments.
class DimensionError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// An argument violates a documented precondition (e.g. non unit-modulus symbol).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A numeric argument lies outside the domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Index outside the array aperture.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// The channel estimate cannot be inverted.
class SingularChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sakf
