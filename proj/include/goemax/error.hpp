#pragma once

#include <stdexcept>
#include <string>

namespace goemax {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two Λ (or Ω) values coincide, so the partial-fraction form is undefined.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

// Raised by the error-target map when the bracket is negative or the
// denominator vanishes; the outer loop reacts by stepping the multiplier.
class InfeasibleTarget : public Error {
 public:
  using Error::Error;
};

class DegenerateSplit : public Error {
 public:
  using Error::Error;
};

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace goemax
