#pragma once

#include <stdexcept>
#include <string>

namespace hhm {

// Bad input: dimension mismatch, point outside the ball, malformed spec.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical guard refused to produce a value (near-boundary evaluation,
// kernel singularity, precision loss).
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite value or failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_invalid(const std::string& what);
[[noreturn]] void throw_guard(const std::string& what);
[[noreturn]] void throw_numeric(const std::string& what);

}  // namespace hhm
