#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace pmp {

enum class ErrorKind {
  Domain,              // argument outside its admissible set
  MalformedControl,    // one-sided limits disagree at a breakpoint
  AlreadyMayer,        // Bolza transform requested on a Mayer problem
  TransformInconsistency,
  DomainExit,          // trajectory left Omega
  ShrinkRadius,        // tube radius too large for Omega
  ContractionViolation,
  InvarianceViolation,
  NeedleBudget,
  IllConditioned,
  Contract,            // dimension mismatch or missing argument
  Config,
};

const char* to_string(ErrorKind kind);

/// Error raised by every module of the toolkit.
///
/// `value` carries a numeric hint where one exists: the exit time for
/// DomainExit, the largest admissible radius for ShrinkRadius, the offending
/// needle index for NeedleBudget, the measured ratio for ContractionViolation.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<double> value = std::nullopt)
      : std::runtime_error(what), kind_(kind), value_(value) {}

  ErrorKind kind() const { return kind_; }
  std::optional<double> value() const { return value_; }

 private:
  ErrorKind kind_;
  std::optional<double> value_;
};

}  // namespace pmp
