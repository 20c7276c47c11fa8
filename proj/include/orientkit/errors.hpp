#pragma once

#include <stdexcept>
#include <cstddef>
#include <string>

namespace orientkit {

/// Input violates a documented precondition or type invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (e.g. non-finite).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Not enough observations to produce an estimate.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A decision references an asset or category that does not exist.
class UnknownTargetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace orientkit

namespace orientkit {

/// Malformed record in an input file. `line` is 1-based, 0 when not line-oriented.
class FormatError : public ValidationError {
public:
    FormatError(const std::string& what, std::size_t line)
        : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace orientkit
