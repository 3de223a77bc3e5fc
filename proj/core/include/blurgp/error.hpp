#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blurgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix arguments whose sizes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its documented range (sigma <= 0, M > N, ...).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Malformed, empty or non-finite input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical domain violation or a broken internal consistency check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The doubly blurred Gram matrix could not be factorized even after
/// escalating the diagonal jitter.
class IllConditionedBasis : public NumericalError {
 public:
  IllConditionedBasis(const std::string& what, std::vector<double> attempted)
      : NumericalError(what), attempted_jitters_(std::move(attempted)) {}

  const std::vector<double>& attempted_jitters() const noexcept {
    return attempted_jitters_;
  }

 private:
  std::vector<double> attempted_jitters_;
};

/// A reference quadrature failed to reach its requested precision. This is a
/// test-infrastructure failure, not a model failure.
class OraclePrecisionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace blurgp
