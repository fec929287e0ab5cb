#pragma once

#include <stdexcept>
#include <string>

namespace knudsen {

/// Bad user-supplied parameter (out-of-range curvature, fraction, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid or degenerate cell geometry (self-intersection, leak, corner hit).
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, singular system, unreliable regime.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// File or serialization failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace knudsen
