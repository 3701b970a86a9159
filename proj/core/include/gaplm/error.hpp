#pragma once

#include <stdexcept>
#include <string>

namespace gaplm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (e.g. x outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed, non-finite or out-of-support data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent user configuration (unknown column, duplicate submodel, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible / positive definite is not.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The working design of a fit does not have full column rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& message, int column, std::string column_name)
      : Error(message), column_(column), column_name_(std::move(column_name)) {}

  int column() const noexcept { return column_; }
  const std::string& column_name() const noexcept { return column_name_; }

 private:
  int column_;
  std::string column_name_;
};

}  // namespace gaplm
