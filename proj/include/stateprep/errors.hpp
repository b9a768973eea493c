#ifndef STATEPREP_ERRORS_HPP
#define STATEPREP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace stateprep
{

// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: dimension mismatch, non-Hermitian matrix, bad grid.
class ValidationError : public Error
{
public:
    using Error::Error;
};

// Parameter outside the domain of an operation (center off-grid, etc.).
class DomainError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

// The physics has no answer: the trigger never fires, the outcome has zero
// probability, or the state has zero trace.
class PhysicsError : public Error
{
public:
    using Error::Error;
};

class NumericError : public Error
{
public:
    using Error::Error;
};

// Soft diagnostics collected by operations whose assumptions are only
// approximately met (quasimonochromatic packets, short-trigger forms, ...).
using Warnings = std::vector<std::string>;

inline void warn(Warnings *sink, std::string message)
{
    if (sink != nullptr) {
        sink->push_back(std::move(message));
    }
}

} // namespace stateprep

#endif // STATEPREP_ERRORS_HPP
