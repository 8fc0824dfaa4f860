#pragma once

#include <stdexcept>
#include <string>

namespace betalab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed descriptor, out-of-domain parameter, violated precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The enclosure of b*x contains an integer, so the branch of T_b is not certified
/// at the current precision. Orbit drivers catch this and restart at higher precision.
class AmbiguousBranch : public Error {
 public:
  using Error::Error;
};

/// Raised when certification still fails at the maximal precision allowed.
class PrecisionExhausted : public Error {
 public:
  using Error::Error;
};

/// A quantity could not be decided from the certified data (e.g. sign of an
/// orbit value whose enclosure touches 0).
class Undetermined : public Error {
 public:
  using Error::Error;
};

}  // namespace betalab
