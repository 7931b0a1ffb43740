#pragma once

#include <stdexcept>
#include <string>

namespace lipbarrier {

enum class ErrorKind {
  evaluation_failure,
  degenerate_derivative,
  invalid_threshold,
  precondition,
  range,
  pole,
  domain,
  exterior_ball_violation,
  geometric_degeneracy,
  patch_too_small,
  internal_consistency,
  nontermination,
  meshing,
  solver_failure,
  budget,
  config,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-readable category. The CLI maps the
/// category onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace lipbarrier
