#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dyann {

/// Base of every error raised by the library. Callers that only care about
/// "did it fail" catch this; tests match on the concrete subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownNode : public Error {
 public:
  using Error::Error;
};

class DuplicateEdge : public Error {
 public:
  using Error::Error;
};

class NonForwardEdge : public Error {
 public:
  using Error::Error;
};

class NotTrainable : public Error {
 public:
  using Error::Error;
};

// Persistence errors.

class BadVersion : public Error {
 public:
  using Error::Error;
};

class UnknownActivation : public Error {
 public:
  using Error::Error;
};

class DanglingTarget : public Error {
 public:
  using Error::Error;
};

class UnsortedDocument : public Error {
 public:
  using Error::Error;
};

class InvalidDocument : public Error {
 public:
  using Error::Error;
};

class UnknownKey : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dyann
