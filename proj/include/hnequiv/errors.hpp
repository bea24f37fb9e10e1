#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hnequiv {

/// Base of every error thrown by the library. `code()` is a short stable
/// identifier used as the reason code when the harness excludes a replication.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual std::string_view code() const noexcept { return "error"; }
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
    std::string_view code() const noexcept override { return "domain"; }
};

/// Iterative scheme (quadrature, continued fraction) missed its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
    std::string_view code() const noexcept override { return "convergence"; }
};

/// Sample for which an estimator is undefined (S = 0, all-zero weights, ...).
class DegenerateSampleError : public Error {
public:
    using Error::Error;
    std::string_view code() const noexcept override { return "degenerate"; }
};

/// Y_{n-1} == Y_n (or another tie) makes the maximal invariant undefined.
class TieError : public Error {
public:
    using Error::Error;
    std::string_view code() const noexcept override { return "tie"; }
};

/// Conditional-expectation draw loop ended without a single accepted point.
class InsufficientAcceptanceError : public Error {
public:
    using Error::Error;
    std::string_view code() const noexcept override { return "insufficient_acceptance"; }
};

class IoError : public Error {
public:
    using Error::Error;
    std::string_view code() const noexcept override { return "io"; }
};

} // namespace hnequiv
