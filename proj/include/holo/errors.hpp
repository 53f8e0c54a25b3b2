#pragma once

#include <stdexcept>
#include <string>

namespace holo {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed textual input (rationals, polynomials, config files).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

/// An operation left the domain it is defined on (division by zero,
/// negative exponent of a non-Laurent symbol, inverse of a harmonic, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// The iterative closure construction failed to reach a zero residual
/// within the iteration cap.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, int iterations)
        : Error(what), iterations(iterations) {}
    int iterations;
};

/// The constraint null space of a coupled-element ensemble is too small
/// to draw nontrivial test fields from.
class DegenerateConstraints : public Error {
public:
    explicit DegenerateConstraints(const std::string& what) : Error(what) {}
};

/// Two trajectories cannot be compared on the requested grids.
class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what) : Error(what) {}
};

/// A closure stencil needs more neighbours than the periodic macro grid has.
class StencilWiderThanGrid : public Error {
public:
    explicit StencilWiderThanGrid(const std::string& what) : Error(what) {}
};

/// A time integration produced a NaN or infinity.
class NonFinite : public Error {
public:
    NonFinite(const std::string& what, double time) : Error(what), time(time) {}
    double time;
};

/// Bad tool configuration (unknown key, missing section, bad value).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace holo
