#include "nhb/errors.hpp"

namespace nhb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Corner: return "corner";
    case ErrorKind::Grazing: return "grazing";
    case ErrorKind::FocalPoint: return "focal-point";
    case ErrorKind::StepUnderflow: return "step-underflow";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return 2;
    case ErrorKind::Domain:
    case ErrorKind::Corner:
    case ErrorKind::Grazing:
    case ErrorKind::FocalPoint:
    case ErrorKind::StepUnderflow: return 3;
    case ErrorKind::Timeout: return 4;
    case ErrorKind::Io: return 5;
    case ErrorKind::Inconclusive: return 6;
  }
  return 1;
}

}  // namespace nhb
