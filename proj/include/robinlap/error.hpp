#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robinlap {

enum class ErrorKind {
    invalid_dimension,
    invalid_size,
    invalid_argument,
    shape_mismatch,
    cut_violation,
    non_real,
    non_finite,
    not_found,
    contraction_violation,
    non_convergence,
    spectral_collision,
    constraint_singular,
    indefinite_system,
    config_invalid,
    io_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. The kind is what callers branch on; the message is
/// for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Iterative solver failure; carries the last recomputed relative residual
/// (or the offending norm estimate for contraction violations).
class SolverError : public Error {
public:
    SolverError(ErrorKind kind, const std::string& message, double value)
        : Error(kind, message), value_(value) {}

    double value() const noexcept { return value_; }

private:
    double value_;
};

} // namespace robinlap
