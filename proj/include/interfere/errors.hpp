#pragma once

#include <stdexcept>
#include <string>

namespace interfere {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidCovariance : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

// The measure's moment matrix is singular: it carries no information on the
// direct treatment effects.
class DegenerateMeasure : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_theta, long iterations)
      : Error(what), last_theta_(last_theta), iterations_(iterations) {}

  double last_theta() const noexcept { return last_theta_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_theta_;
  long iterations_;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace interfere
