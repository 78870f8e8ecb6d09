#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace wtcap {

/// Short scientific rendering of a number for error messages.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonpositive or inconsistent matrix dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent channel-spec document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the domain of a function (a barrier argument is not
/// strictly positive, or a matrix that must be positive definite is not).
class DomainError : public Error {
 public:
  DomainError(std::string constraint, const std::string& what)
      : Error(what), constraint_(std::move(constraint)) {}

  /// Short name of the violated constraint: "R>0", "TPC", "IPC[j]", "K>0".
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// Failures inside the iterative solvers. Carries a context trail that callers
/// extend while the exception propagates outward.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(what), message_(what) {}

  void add_context(const std::string& ctx) { message_ += " [" + ctx + "]"; }
  const char* what() const noexcept override { return message_.c_str(); }

 private:
  std::string message_;
};

/// The linear system is singular to working precision.
class SingularSystemError : public SolverError {
 public:
  SingularSystemError(const std::string& what, double rcond)
      : SolverError(what), rcond_(rcond) {}

  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Backtracking exhausted its step budget without meeting the contraction and
/// interiority tests.
class LineSearchError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Non-finite values appeared where finite ones are required.
class NumericalError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace wtcap
