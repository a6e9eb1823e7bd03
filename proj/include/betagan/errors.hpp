#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace betagan {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor/layer shape disagreement. Messages name both shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

/// A domain rule was violated (architecture constraints, pairing rules,
/// invalid configuration values).
class ConstraintError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure; message carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line)
        : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace betagan
