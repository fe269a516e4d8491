#pragma once

#include <stdexcept>
#include <string>

namespace ofdmshape {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when a normal-equation system cannot be factored without
/// regularization.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// A power constraint cannot be met by any admissible solution.
class Infeasible : public Error {
 public:
  Infeasible(std::string mask, double bound, double attainable);

  const std::string& mask() const noexcept { return mask_; }
  double bound() const noexcept { return bound_; }
  double attainable() const noexcept { return attainable_; }

 private:
  std::string mask_;
  double bound_;
  double attainable_;
};

}  // namespace ofdmshape
