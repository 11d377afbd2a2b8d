#pragma once

#include <stdexcept>
#include <string>

namespace cdint {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Structurally or numerically invalid inputs: malformed graphs, inadmissible
// potentials, out-of-range parameters.
class ValidationError : public Error {
public:
  using Error::Error;
};

// An exact computation was refused because it would exceed the enumeration
// budget. `required()` is the number of evaluations the request implies.
class BudgetError : public Error {
public:
  BudgetError(const std::string& what, double required)
      : Error(what), required_(required) {}
  double required() const noexcept { return required_; }

private:
  double required_;
};

// Malformed model files.
class ParseError : public Error {
public:
  using Error::Error;
};

}  // namespace cdint
