#pragma once

#include <vector>

#include "delaytrack/charfun.hpp"
#include "delaytrack/model.hpp"
#include "delaytrack/types.hpp"

namespace delaytrack {

/// Finite generalized pair (sigma_A, sigma_E) approximating the delay
/// eigenproblem by Chebyshev-Gauss-Lobatto collocation on [-tau_max, 0].
///
/// Block k (rows/cols k*r .. k*r+r-1) holds the history at nodes[k]; block 0
/// is the segment endpoint theta = 0 and carries the model equation.
struct DiscretizedPencil {
  SparseMatrix sigma_A;
  SparseMatrix sigma_E;
  int degree = 0;
  Index block_size = 0;
  std::vector<double> nodes;
  Index endpoint_block = 0;

  Index dimension() const { return sigma_A.rows(); }
};

DiscretizedPencil discretize(const DelayedLinearModel& model, int degree);

struct Eigenpair {
  Complex s;
  ComplexVector phi;
  double residual = 0.0;
};

/// Sorted by descending Re(s).
using Eigensolution = std::vector<Eigenpair>;

struct SolveOptions {
  Index dense_limit = 2000;          // dense QZ at or below this dimension
  double infinite_threshold = 1e8;   // |s| above this is treated as an infinite eigenvalue
  double arnoldi_tol = 1e-10;
  int arnoldi_max_restarts = 200;
};

/// The `count` finite eigenvalues of the pencil nearest to `shift`, with
/// full-length eigenvectors and pencil residuals.
Eigensolution solve_discretized(const DiscretizedPencil& pencil, Complex shift, int count,
                                const SolveOptions& options = {});

/// Block of v at the theta = 0 node.
ComplexVector lift_eigenvector(const DiscretizedPencil& pencil, const ComplexVector& v);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 20;
  double singular_rcond = 1e-13;
};

struct RefinedEigenpair {
  Complex s;
  ComplexVector phi;
  double residual = 0.0;
  int iterations = 0;
};

/// Newton on [P(s) phi; (phi^T phi - 1)/2] = 0. Throws non_convergence
/// (carrying the last residual, also on a singular Jacobian far from any root)
/// or defective on a singular bordered Jacobian at a small residual.
RefinedEigenpair refine_newton(const CharacteristicFunction& characteristic, Complex s0,
                               ComplexVector phi0, const NewtonOptions& options = {});
RefinedEigenpair refine_newton(const DelayedLinearModel& model, Complex s0, ComplexVector phi0,
                               const NewtonOptions& options = {});

struct InitSettings {
  int degree = 16;
  Complex shift{0.0, 0.0};
  int count = 6;
  NewtonOptions newton;
  SolveOptions solve;
};

/// Discretize, solve near the shift, lift, and refine every candidate on the
/// exact characteristic function. Candidates that fail to refine are dropped.
Eigensolution initial_eigenpairs(const CharacteristicFunction& characteristic,
                                 const InitSettings& settings);

/// Approximate null vector of P(s) by inverse iteration; used to seed Newton
/// from an eigenvalue guess alone.
ComplexVector approximate_null_vector(const CharacteristicFunction& characteristic, Complex s);

}  // namespace delaytrack
