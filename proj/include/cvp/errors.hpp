#pragma once

#include <stdexcept>
#include <string>

namespace cvp {

/// Arguments that do not belong together (e.g. points from different manifolds).
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric argument outside the operation's domain (t <= 0, f < 3, n < 2, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The operation has no implementation for the requested manifold.
class unsupported_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A closed-form construction was requested outside the range where it is proven.
class hypothesis_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input file (packing, measure JSON, run configuration).
class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cvp
