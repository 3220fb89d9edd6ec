#pragma once

#include <stdexcept>
#include <string>

namespace corrx {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// File missing or unreadable.
class FileError : public Error {
  using Error::Error;
};

/// Malformed date or numeric field.
class ParseError : public Error {
  using Error::Error;
};

/// Two rows carry the same calendar date.
class DuplicateDateError : public Error {
  using Error::Error;
};

/// Row with a field count different from the header.
class RaggedRowError : public Error {
  using Error::Error;
};

/// Missing value inside the usable span of a series.
class MissingCellError : public Error {
  using Error::Error;
};

/// Input outside the mathematical domain of an operation
/// (non-positive price, invalid parameters, zero variance, ...).
class DomainError : public Error {
  using Error::Error;
};

/// Date indices cannot be reconciled (empty intersection, mismatch).
class AlignmentError : public Error {
  using Error::Error;
};

/// Iterative estimation exhausted its retry schedule.
class ConvergenceError : public Error {
  using Error::Error;
};

/// A JSON document does not match its schema. The message carries a
/// JSON-pointer-style path to the offending node.
class SchemaError : public Error {
  using Error::Error;
};

/// A quasi-correlation or covariance matrix lost positive definiteness.
/// Carries the first offending time index.
class PdError : public Error {
 public:
  PdError(long t, const std::string& what) : Error(what), t_index(t) {}
  long t_index;
};

}  // namespace corrx
