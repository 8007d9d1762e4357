#pragma once

#include <stdexcept>
#include <string>

namespace hris {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree with the operation's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is out of its admissible range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The number of sub-frames (or another design dimension) is too small for
/// the requested receiver to deliver a unique estimate.
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

/// A least-squares factor that must be full rank is numerically deficient.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// The anchor symbol used to resolve the scaling ambiguity vanished.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

}  // namespace hris
