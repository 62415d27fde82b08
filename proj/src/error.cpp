#include "delaytrack/error.hpp"

namespace delaytrack {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::range: return "range";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::nonfinite: return "nonfinite";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::defective: return "defective";
    case ErrorCode::iteration: return "iteration";
    case ErrorCode::reinit_failure: return "reinit_failure";
    case ErrorCode::missing_file: return "missing_file";
    case ErrorCode::malformed_matrix: return "malformed_matrix";
    case ErrorCode::unknown_regime: return "unknown_regime";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

}  // namespace delaytrack
