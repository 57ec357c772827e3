#pragma once

#include <stdexcept>
#include <string>

namespace marktop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Errors caused by bad input (CLI maps these to exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public ConfigError {
public:
    using ConfigError::ConfigError;
};
class InvalidInterval : public ConfigError {
public:
    using ConfigError::ConfigError;
};
class DegenerateCondenser : public ConfigError {
public:
    using ConfigError::ConfigError;
};
class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Numerical failures (CLI maps these to exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

class BoundInvalid : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class EllipticConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class PencilError : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class PoleLocationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class RankDeficiency : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class Breakdown : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class PoleHit : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class PoleCollision : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};
class DegreeUnavailable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace marktop
