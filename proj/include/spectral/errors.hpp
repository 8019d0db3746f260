#pragma once

#include <stdexcept>
#include <string>

namespace spectral {

/// Root of every error raised by the library. The category decides the CLI
/// exit code (validation 2, accuracy 3, capacity/completeness 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (poles, non-positive x, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Argument inside the domain but outside the supported numerical envelope.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Input data rejected by an invariant check.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Not enough data (table size, coefficient depth, completeness window).
class CapacityError : public Error {
public:
    using Error::Error;
};

/// A numerical certificate could not be met.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double last_delta)
        : Error(what), last_delta_(last_delta) {}
    double last_delta() const noexcept { return last_delta_; }

private:
    double last_delta_;
};

}  // namespace spectral
