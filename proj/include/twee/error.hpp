#pragma once

#include <stdexcept>
#include <string>

namespace twee {

/// Error categories. The CLI maps each one to an exit code.
enum class ErrorKind { parse, validation, degenerate, fit_failure };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed input text (CSV, table asset, numeric arguments).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// The problem is numerically degenerate (rank zero, too many boundary roots, ...).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& what) : Error(ErrorKind::degenerate, what) {}
};

}  // namespace twee
