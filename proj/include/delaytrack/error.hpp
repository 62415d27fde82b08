#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace delaytrack {

enum class ErrorCode {
  range,            // parameter outside the family range
  configuration,    // inconsistent settings or model layout
  dimension,        // matrix dimension mismatch
  nonfinite,        // overflow / NaN in an evaluation
  singularity,      // transfer-function pole or branch cut, singular shifted matrix
  non_convergence,  // Newton iteration exhausted
  defective,        // singular bordered Jacobian or continuation matrix (fold)
  iteration,        // Arnoldi did not converge
  reinit_failure,   // no candidate eigenpair overlaps the previous one
  missing_file,
  malformed_matrix,
  unknown_regime,
  parse,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(message), code_(code), residual_(residual) {}

  ErrorCode code() const noexcept { return code_; }

  /// Last residual or condition estimate when the failure is numerical, NaN otherwise.
  double residual() const noexcept { return residual_; }

 private:
  ErrorCode code_;
  double residual_;
};

}  // namespace delaytrack
