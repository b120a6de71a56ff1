#pragma once

#include <stdexcept>
#include <string>

namespace tistop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A SmoothFn was asked for a derivative it does not carry.
class MissingDerivativeError : public Error {
public:
    using Error::Error;
};

/// Model or problem parameters violate a structural condition (e.g. 2mu + sigma^2 < 0).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Euler stepping could not keep the state inside the state interval.
class BoundaryEscapeError : public Error {
public:
    using Error::Error;
};

/// A simulated path did not finish before the censoring horizon.
class HorizonExceededError : public Error {
public:
    using Error::Error;
};

/// Moment of a killed process does not exist for the given intensity.
class DivergentMomentError : public Error {
public:
    using Error::Error;
};

/// Division by a vanishing coefficient, e.g. (h - psi)^2 g''(psi) = 0.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Target was never reached by a cumulative sequence.
class TargetNotReachedError : public Error {
public:
    using Error::Error;
};

/// Linear solve of the discrete chain failed.
class SolveError : public Error {
public:
    using Error::Error;
};

/// Configuration document failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace tistop
