#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace orbitmatch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations (out-of-range n, bad ratio, empty radii, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class AlphabetMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class MetricMismatch : public Error {
 public:
  using Error::Error;
};

// Power iteration failed, or the chain is reducible/periodic.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// The quantity is undefined for this input: H2 = 0, zero collisions,
// saturated profiles, too few usable radii.
class NumericDegeneracy : public Error {
 public:
  using Error::Error;
};

// Regression could not be formed; carries how many points survived.
class FitError : public NumericDegeneracy {
 public:
  FitError(const std::string& what, std::size_t usable)
      : NumericDegeneracy(what), usable_(usable) {}
  std::size_t usable() const noexcept { return usable_; }

 private:
  std::size_t usable_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace orbitmatch
