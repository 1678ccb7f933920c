#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pace {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model text. Carries a 1-based source location.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), message_(message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

/// A model violates a structural or numeric invariant (bad binding, row sums, state-space limit).
class ModelError : public Error {
public:
    using Error::Error;
};

/// A query is malformed with respect to the model (unknown variable, value outside support, ...).
class QueryError : public Error {
public:
    using Error::Error;
};

/// Conditioning on an event of probability zero.
class ZeroProbabilityError : public QueryError {
public:
    using QueryError::QueryError;
};

/// Expression evaluation failed (non 0/1 condition, division by zero, ...).
class EvalError : public Error {
public:
    using Error::Error;
};

} // namespace pace
