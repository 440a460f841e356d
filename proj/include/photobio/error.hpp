#pragma once

#include <stdexcept>
#include <string>

namespace photobio {

enum class ErrorKind {
  invalid_parameter,
  no_root,
  bracket_failure,
  non_convergence,
  integration_overflow,
  out_of_domain,
  not_converged_point,
  eigensolver_failure,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_parameter: return "invalid_parameter";
    case ErrorKind::no_root: return "no_root";
    case ErrorKind::bracket_failure: return "bracket_failure";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::integration_overflow: return "integration_overflow";
    case ErrorKind::out_of_domain: return "out_of_domain";
    case ErrorKind::not_converged_point: return "not_converged_point";
    case ErrorKind::eigensolver_failure: return "eigensolver_failure";
  }
  return "unknown";
}

/// Single exception type for every library failure; `kind()` lets callers
/// (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of a parameter or configuration check, false for
  /// numerical failures.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::invalid_parameter || kind_ == ErrorKind::out_of_domain;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace photobio
