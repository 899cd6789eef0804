#pragma once

#include <stdexcept>
#include <string>

namespace lrhorizon {

/// Base class for all lrhorizon errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* code() const noexcept { return "error"; }
};

/// Bad input data or configuration (CLI exit code 1).
class ValidationError : public Error {
  public:
    using Error::Error;
    const char* code() const noexcept override { return "validation"; }
};

/// Too few points to run the requested fit (CLI exit code 2).
class UnfittableError : public Error {
  public:
    using Error::Error;
    const char* code() const noexcept override { return "unfittable"; }
};

/// A quadratic fit came out with non-positive curvature (CLI exit code 2).
class NonConvexError : public Error {
  public:
    using Error::Error;
    const char* code() const noexcept override { return "nonconvex"; }
};

/// Optimizer or resampling failure (CLI exit code 2).
class FitError : public Error {
  public:
    using Error::Error;
    const char* code() const noexcept override { return "fit"; }
};

} // namespace lrhorizon
