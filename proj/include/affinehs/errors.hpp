#pragma once

#include <stdexcept>
#include <string>

namespace affinehs {

/// Malformed or inconsistent input (dimensions, invariants of a measure, parse failures).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not deliver a result within its contract.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, int component = -1)
        : NumericalError(what), component_(component) {}

    /// Index of the ray (or other component) whose integral failed, -1 if unknown.
    int component() const { return component_; }

private:
    int component_;
};

} // namespace affinehs
