#pragma once

#include <stdexcept>
#include <string>

namespace clickpol {

/// Bad argument at an API boundary (non-finite angle, mismatched table size, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// State parameters outside the normalizable region (|lambda| >= 1).
class InvalidState : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A computation hit a singular or sign-violating intermediate.
class NumericDegeneracy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested quantity is not determined by the available data.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Noisy variance never crosses zero (cos(theta) == 0).
class NoThreshold : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace clickpol
