#pragma once

#include <stdexcept>
#include <string>

namespace ncot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scalar function was evaluated outside its domain (e.g. log at 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An operation that needs strictly positive spectrum received a singular input.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A transport path violates the discrete continuity equation.
class InvalidPathError : public Error {
 public:
  using Error::Error;
};

class DegeneratePairError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed problem file or record. The message carries the field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncot
