#pragma once

#include <stdexcept>
#include <string>

namespace mbsfn {

/// Station placement exhausted its attempt budget.
class PackingInfeasible : public std::runtime_error {
 public:
  PackingInfeasible(std::string msg, int station_index, int attempts)
      : std::runtime_error(std::move(msg)), station_index(station_index), attempts(attempts) {}
  int station_index;
  int attempts;
};

/// No same-area station lies within the combining distance limit.
class EmptyCombiningSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance factorization lost positive-definiteness.
class CovarianceFactorizationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-form outage evaluation fell outside the admissible band even on the
/// extended-precision path.
class NumericalInstability : public std::runtime_error {
 public:
  NumericalInstability(std::string msg, double value)
      : std::runtime_error(std::move(msg)), value(value) {}
  double value;
};

/// Partial-fraction expansion requested for coinciding scale parameters.
class DegenerateScales : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumeration would exceed the configured complexity budget.
class ComplexityGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Convolution oracle could not reach the target accuracy within its
/// step-halving budget.
class GridResolutionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mbsfn
