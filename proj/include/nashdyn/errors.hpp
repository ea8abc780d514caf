#pragma once

#include <stdexcept>
#include <string>

namespace nashdyn {

/// Bad argument: dimension mismatch, violated precondition, unknown identifier.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A built-in problem could not be constructed from its parameters.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An oracle produced a non-finite value, or was evaluated outside its domain.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, long coordinate = -1)
      : std::runtime_error(what), coordinate_(coordinate) {}

  /// Offending coordinate of the input point, -1 when not attributable.
  long coordinate() const noexcept { return coordinate_; }

 private:
  long coordinate_;
};

/// Linear solve or eigen decomposition failed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Projection failure, e.g. an intersection that turned out to be empty.
class SetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nashdyn
