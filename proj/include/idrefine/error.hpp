#pragma once

#include <stdexcept>
#include <string>

namespace idrefine {

// Base of every exception the library throws. The C API maps each subclass
// onto one idr_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed diagram text; `offset` is the byte position when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset = npos)
      : Error(what), offset_(offset) {}
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// A diagram that parsed but breaks a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Evidence whose probability is below the impossibility threshold.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

// Caller broke a precondition (unknown node, wrong node kind, bad option).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Enumeration would exceed the configured state-space cap.
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace idrefine
