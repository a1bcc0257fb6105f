#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stk {

/// Argument outside the mathematical domain of an operation (bad index, length mismatch, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The operation needs a shape property (usually equal dimensions) that the shape lacks.
class UnsupportedShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A constraint system admits no solution within tolerance.
class InconsistentConstraintsError : public std::runtime_error {
public:
    InconsistentConstraintsError(const std::string& what, double residual_norm)
        : std::runtime_error(what), residual_norm_(residual_norm) {}

    double residual_norm() const noexcept { return residual_norm_; }

private:
    double residual_norm_;
};

/// A linear solve failed or was too ill-conditioned to trust.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// A required input file is missing or unreadable.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed binary or JSON input.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

}  // namespace stk
