#include "lipbarrier/error.hpp"

namespace lipbarrier {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::evaluation_failure: return "evaluation-failure";
    case ErrorKind::degenerate_derivative: return "degenerate-derivative";
    case ErrorKind::invalid_threshold: return "invalid-threshold";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::range: return "range";
    case ErrorKind::pole: return "pole";
    case ErrorKind::domain: return "domain";
    case ErrorKind::exterior_ball_violation: return "exterior-ball-violation";
    case ErrorKind::geometric_degeneracy: return "geometric-degeneracy";
    case ErrorKind::patch_too_small: return "patch-too-small";
    case ErrorKind::internal_consistency: return "internal-consistency";
    case ErrorKind::nontermination: return "nontermination";
    case ErrorKind::meshing: return "meshing";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::budget: return "budget";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lipbarrier
