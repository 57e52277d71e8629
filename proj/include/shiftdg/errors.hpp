#pragma once

#include <stdexcept>
#include <string>

namespace shiftdg {

/// Inadmissible parameters (mesh sizes, degrees, rule sizes, config keys).
class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation point outside the domain of a field or solution.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Mesh or space lacks the structure an operation relies on.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Failures of the numerical kernels (singular factorization, non-SPD Gram).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace shiftdg
