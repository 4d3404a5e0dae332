#pragma once

#include <stdexcept>
#include <string>

namespace zml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at a pole (e.g. zeta at s = 1).
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Argument outside the range covered by precomputed data (e.g. x above a sieve limit).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// 64-bit index arithmetic overflowed and no cap was supplied.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A configured memory or enumeration budget would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its requested accuracy.
///
/// Carries the best available estimate so callers can still report it.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double est_error)
      : Error(what), best_estimate_(best_estimate), est_error_(est_error) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double est_error() const noexcept { return est_error_; }

 private:
  double best_estimate_;
  double est_error_;
};

}  // namespace zml
