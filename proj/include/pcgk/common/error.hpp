#pragma once

#include <stdexcept>
#include <string>

namespace pcgk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or invalid tensor arguments.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Degenerate geometry: coplanar hulls, camera inside the object, ...
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Malformed input files or datasets. Maps to CLI exit code 3.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during training (NaN gradients, non-finite losses).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace pcgk
