#pragma once

#include <stdexcept>
#include <string>

namespace ncerg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input violated a documented precondition (bad shape, bad argument, ...).
class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// An iterative routine ran out of its iteration budget.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

}  // namespace ncerg
