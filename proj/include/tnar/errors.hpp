#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tnar {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Raised when a vector to be normalized has (numerically) zero length.
class ZeroVector : public Error {
public:
    using Error::Error;
};

// CG search direction with non-positive curvature: operator is not SPD.
class BreakdownError : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    NonFiniteLoss(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class OriginError : public Error {
public:
    using Error::Error;
};

class DegenerateChart : public Error {
public:
    using Error::Error;
};

class MissingChart : public Error {
public:
    using Error::Error;
};

class EmptySet : public Error {
public:
    using Error::Error;
};

class UnsupportedDim : public Error {
public:
    using Error::Error;
};

// Malformed or incompatible checkpoint / data file.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace tnar
