#pragma once

#include <stdexcept>
#include <string>

namespace newsclick {

// Base of every error the library raises. The CLI maps the concrete
// subclasses onto exit codes (data errors -> 2, I/O errors -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input text that does not follow the expected grammar.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input whose values break a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace newsclick
