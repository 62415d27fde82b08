#pragma once

#include <vector>

#include "delaytrack/types.hpp"

namespace delaytrack {

struct RitzPair {
  Complex value;        // eigenvalue of the pencil (shift + 1/theta)
  ComplexVector vector;
};

/// Shift-invert Arnoldi for A x = s B x: the `count` eigenvalues nearest
/// `shift`, via a sparse LU of (A - shift B) and explicit restarts.
std::vector<RitzPair> shift_invert_arnoldi(const SparseMatrix& A, const SparseMatrix& B,
                                           Complex shift, int count, double tol,
                                           int max_restarts);

}  // namespace delaytrack
