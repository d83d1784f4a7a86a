#pragma once

#include <stdexcept>
#include <string>

namespace sepmarg {

// Caller passed something outside an operation's domain.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Request is well formed but outside what this library handles
// (e.g. non-qubit parties where Pauli expansions are required).
class Unsupported : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Result would exceed a hard size cap.
class ResourceLimit : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failure inside a solver. what() carries iterate diagnostics.
class SolverFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace sepmarg
