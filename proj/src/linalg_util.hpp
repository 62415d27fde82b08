#pragma once

#include <cmath>
#include <limits>

#include "delaytrack/types.hpp"

namespace delaytrack::detail {

template <class Scalar>
double one_norm(const Eigen::SparseMatrix<Scalar>& a) {
  double best = 0.0;
  for (Index k = 0; k < a.outerSize(); ++k) {
    double column = 0.0;
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a, k); it; ++it)
      column += std::abs(it.value());
    best = std::max(best, column);
  }
  return best;
}

/// Lower-bound estimate of 1/(||A||_1 ||A^-1||_1) from two probe solves with a
/// factorized A. Returns 0 when a probe solve is non-finite.
template <class Scalar, class Solver>
double reciprocal_condition(const Eigen::SparseMatrix<Scalar>& a, const Solver& lu) {
  using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index n = a.rows();
  const double a_norm = one_norm(a);
  if (a_norm == 0.0) return 0.0;
  double inv_norm = 0.0;
  for (int probe = 0; probe < 2; ++probe) {
    VectorS b(n);
    for (Index i = 0; i < n; ++i) {
      const double sign = (probe == 0 || (i * 7 + 3) % 5 < 2) ? 1.0 : -1.0;
      b[i] = Scalar(sign * (1.0 + static_cast<double>(i % 11) / 11.0));
    }
    const VectorS x = lu.solve(b);
    const double ratio = x.template lpNorm<1>() / b.template lpNorm<1>();
    if (!std::isfinite(ratio)) return 0.0;
    inv_norm = std::max(inv_norm, ratio);
  }
  if (inv_norm == 0.0) return 0.0;
  return 1.0 / (a_norm * inv_norm);
}

}  // namespace delaytrack::detail
