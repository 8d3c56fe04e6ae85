#pragma once

#include <stdexcept>
#include <string>

namespace vlp {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input violates a documented precondition (out-of-bounds pixel, H <= 0, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// Geometry that admits no solution: coincident image points, zero-variance fit.
class DegenerateGeometryError : public Error {
public:
    explicit DegenerateGeometryError(const std::string& what) : Error(what) {}
};

// Scene configuration the solver does not support (lamps at different heights).
class UnsupportedConfigurationError : public Error {
public:
    explicit UnsupportedConfigurationError(const std::string& what) : Error(what) {}
};

// Fewer than two identified lamps available for a position solve.
class InsufficientAnchorsError : public Error {
public:
    explicit InsufficientAnchorsError(const std::string& what) : Error(what) {}
};

// Lamps are visible but no pair satisfies the different-x-and-different-y rule.
class DegenerateLayoutError : public Error {
public:
    explicit DegenerateLayoutError(const std::string& what) : Error(what) {}
};

// ROI contains no usable signal (all dark).
class NoSignalError : public Error {
public:
    explicit NoSignalError(const std::string& what) : Error(what) {}
};

// Stripe period shorter than one sensor row; features cannot form.
class UnresolvableStripeError : public Error {
public:
    explicit UnresolvableStripeError(const std::string& what) : Error(what) {}
};

// Two database records could both claim the same measured features.
class AmbiguousIdError : public Error {
public:
    explicit AmbiguousIdError(const std::string& what) : Error(what) {}
};

// Parsing / schema problems in config files and wire frames.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
};

// Transport-level failures in the node mesh.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(what) {}
};

// Service call did not complete in time.
class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& what) : Error(what) {}
};

} // namespace vlp
