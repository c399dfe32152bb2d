#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zdistill {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violated one of its type invariants (non-Hermitian generator,
/// non-finite entries, trace not one, ...).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// The spectral decomposition does not exist (defective matrix).
class NonDiagonalizable : public Error {
public:
    explicit NonDiagonalizable(const std::string& detail)
        : Error("non-diagonalizable: " + detail) {}
};

/// Protocol text could not be parsed. `line()` is 1-based, 0 when the
/// error concerns the program as a whole.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
          line_(line), message_(message) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

/// Compilation against a model binding failed (unknown label, ...).
class CompileError : public Error {
public:
    using Error::Error;
};

/// The kept-outcome probability vanished; the conditional state after
/// `last_valid_n()` cycles is undefined.
class YieldUnderflow : public Error {
public:
    explicit YieldUnderflow(long last_valid_n)
        : Error("yield underflow after N = " + std::to_string(last_valid_n)),
          last_valid_n_(last_valid_n) {}

    long last_valid_n() const noexcept { return last_valid_n_; }

private:
    long last_valid_n_;
};

/// Determinant and eigensolver disagree beyond tolerance.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace zdistill
