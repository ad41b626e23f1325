#pragma once

#include <stdexcept>
#include <string>

namespace nhb {

enum class ErrorKind {
  Domain,        // argument outside the operation's domain
  Parse,         // configuration text could not be parsed/validated
  Io,            // filesystem failure
  Corner,        // trajectory reached a non-smooth boundary point
  Grazing,       // tangential incidence, |u.nu| below threshold
  FocalPoint,    // 1 - r*kappa*sin(phi) <= 0
  StepUnderflow, // adaptive step collapsed
  Timeout,       // no event within the allotted time
  Inconclusive,  // diagnostic could not decide
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

/// Process exit code associated with an error class (0 is success).
int exit_code(ErrorKind kind);

}  // namespace nhb
