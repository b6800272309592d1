#pragma once

#include <stdexcept>
#include <string>

namespace gapcert {

// Precondition violations: bad dimensions, improper transfer functions,
// unstable input where stability is required.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Algorithm breakdowns: bisection stall, singular solves, lost accuracy.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Coprime factorization failures (imaginary-axis Hamiltonian eigenvalues,
// degenerate stabilization).
class FactorizationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// Malformed files or experiment configurations.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace gapcert
