#pragma once

#include <stdexcept>
#include <string>

namespace hrc {

// Malformed job, scenario or reference file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Well-formed input that breaks a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Problem too large for the requested exact method.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scheduler invariant broken at runtime. Always a bug.
class InternalFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed request payload at the service boundary.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace hrc
