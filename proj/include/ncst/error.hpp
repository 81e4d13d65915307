#pragma once

#include <stdexcept>
#include <string>

namespace ncst {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A requested moment does not exist for the given degrees of freedom.
class MomentUndefined : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

// One of the skew-F characterization conditions failed. `which()` is "(i)" or "(ii)".
class ConditionViolated : public Error {
 public:
  explicit ConditionViolated(std::string which, const std::string& detail)
      : Error("condition " + which + " violated: " + detail), which_(std::move(which)) {}
  const std::string& which() const noexcept { return which_; }

 private:
  std::string which_;
};

class RankZero : public Error {
 public:
  using Error::Error;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class OptimizerFailed : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data (files, columns, values).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncst
