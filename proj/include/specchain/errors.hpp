#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specchain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed graph or assignment document.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Document parsed but does not describe a valid partition of the graph.
class ValidationError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class InvalidState : public Error {
public:
    using Error::Error;
};

/// Eigensolver failed to reach the requested residual.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A chain step exhausted its attempt budget.
class StuckChainError : public Error {
public:
    StuckChainError(const std::string& what, std::size_t step, std::string reason)
        : Error(what), step_(step), reason_(std::move(reason)) {}
    std::size_t step() const noexcept { return step_; }
    const std::string& last_reason() const noexcept { return reason_; }

private:
    std::size_t step_;
    std::string reason_;
};

}  // namespace specchain
