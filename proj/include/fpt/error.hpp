#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lexical or syntax error in a boundary expression; `offset` is a 0-based
/// character position into the source text.
class ParseError : public Error {
public:
    enum class Kind { lexical, syntax, non_constant_exponent };

    ParseError(Kind kind, std::size_t offset, const std::string& what)
        : Error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

/// Boundary rejected by build_boundary (f(0) <= 0, concavity, non-finite values).
class BoundaryValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Quadrature failed: panel budget exhausted or a non-finite integrand sample.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimate, double error_estimate)
        : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

/// Invalid run configuration (CLI flags or config file).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fpt
