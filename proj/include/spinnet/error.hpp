#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spinnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed graph text. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column), reason_(what) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string reason_;
};

/// A caller asked for an operation whose precondition does not hold
/// (contracting a loop, splitting a vertex into an empty group, ...).
class GraphError : public Error {
public:
    using Error::Error;
};

/// A dense tensor would exceed the configured entry cap.
class DimensionCapError : public Error {
public:
    DimensionCapError(std::size_t requested, std::size_t cap)
        : Error("tensor of " + std::to_string(requested) + " entries exceeds cap of " +
                std::to_string(cap)),
          requested_(requested), cap_(cap) {}

    std::size_t requested() const noexcept { return requested_; }
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t requested_;
    std::size_t cap_;
};

/// The exact evaluator ran out of its step or term budget.
class BudgetExceededError : public Error {
public:
    using Error::Error;
};

/// Numerical or internal failure during a computation.
class ComputationError : public Error {
public:
    using Error::Error;
};

/// Five normals that admit no 4-simplex.
class GeometryError : public Error {
public:
    using Error::Error;
};

}  // namespace spinnet
