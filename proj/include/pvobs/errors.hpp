#pragma once

#include <stdexcept>
#include <string>

namespace pvobs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value lies outside its admissible range (density outside [0,1], point
/// outside a grid, malformed parameters).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A time step exceeds the stability limit of an explicit scheme.
class CflViolation : public Error {
 public:
  using Error::Error;
};

/// Probe vehicles or segment boundaries lost their strict ordering.
class OrderingViolation : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A scenario document is malformed or violates an invariant.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvobs
