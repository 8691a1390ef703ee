#pragma once

#include <stdexcept>
#include <string>

namespace lavlab {

// Raised when a caller-provided argument is outside the documented range.
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an evaluation point lies outside the problem domain.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a requested operation is not defined for the given structure.
class unsupported_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a report file cannot be written.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lavlab
