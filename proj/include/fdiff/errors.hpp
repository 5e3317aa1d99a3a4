#pragma once

#include <stdexcept>
#include <string>

namespace fdiff {

// Argument outside the mathematical domain of an operation (e.g. |mu| > 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Quadrature, fit or Monte Carlo estimate failed its own convergence check.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Symbolic operation impossible: zero pivot, missing term, degenerate normalization.
class AlgebraError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Moment system inconsistent with a polynomial late-time solution.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A transport-level invariant (DV invariance, FL pattern) did not hold.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fdiff
