#include "delaytrack/arnoldi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "delaytrack/error.hpp"

namespace delaytrack {

namespace {

using LU = Eigen::SparseLU<ComplexSparseMatrix, Eigen::COLAMDOrdering<int>>;

}  // namespace

std::vector<RitzPair> shift_invert_arnoldi(const SparseMatrix& A, const SparseMatrix& B,
                                           Complex shift, int count, double tol,
                                           int max_restarts) {
  const Index n = A.rows();
  if (count < 1) throw Error(ErrorCode::configuration, "eigenvalue count must be >= 1");
  if (count > n) count = static_cast<int>(n);

  const ComplexSparseMatrix Bc = B.cast<Complex>();
  ComplexSparseMatrix shifted;
  LU lu;
  Complex sigma = shift;
  for (int attempt = 0;; ++attempt) {
    shifted = A.cast<Complex>() - sigma * Bc;
    shifted.makeCompressed();
    lu.compute(shifted);
    if (lu.info() == Eigen::Success) break;
    if (attempt == 3) {
      std::ostringstream msg;
      msg << "shifted pencil singular at shift " << shift << "; retry with a perturbed shift";
      throw Error(ErrorCode::singularity, msg.str());
    }
    sigma += 1e-6 * (1.0 + std::abs(sigma)) * Complex(1.0, 0.7);
  }

  const Index m = std::min<Index>(n, std::max<Index>(2 * count + 20, 40));
  ComplexVector start = ComplexVector::Ones(n);
  start.normalize();

  double worst = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= max_restarts; ++restart) {
    ComplexDenseMatrix V = ComplexDenseMatrix::Zero(n, m + 1);
    ComplexDenseMatrix H = ComplexDenseMatrix::Zero(m + 1, m);
    V.col(0) = start;
    Index steps = m;
    bool breakdown = false;
    for (Index j = 0; j < m; ++j) {
      ComplexVector w = lu.solve(Bc * V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        for (Index i = 0; i <= j; ++i) {
          const Complex c = V.col(i).dot(w);
          H(i, j) += c;
          w -= c * V.col(i);
        }
      }
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta < 1e-14 * H.col(j).norm() || beta == 0.0) {
        steps = j + 1;
        breakdown = true;
        break;
      }
      V.col(j + 1) = w / beta;
    }

    Eigen::ComplexEigenSolver<ComplexDenseMatrix> ritz(H.topLeftCorner(steps, steps));
    std::vector<Index> order(static_cast<std::size_t>(steps));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(ritz.eigenvalues()[a]) > std::abs(ritz.eigenvalues()[b]);
    });
    const Index wanted = std::min<Index>(count, steps);

    worst = 0.0;
    ComplexVector next = ComplexVector::Zero(n);
    for (Index k = 0; k < wanted; ++k) {
      const Index idx = order[static_cast<std::size_t>(k)];
      const Complex theta = ritz.eigenvalues()[idx];
      const ComplexVector y = ritz.eigenvectors().col(idx).normalized();
      const double estimate =
          breakdown ? 0.0 : std::abs(H(steps, steps - 1)) * std::abs(y[steps - 1]);
      const double rel = estimate / std::max(std::abs(theta), 1e-300);
      worst = std::max(worst, rel);
      if (rel > tol) next += V.leftCols(steps) * y;
    }

    if (worst <= tol || breakdown) {
      std::vector<RitzPair> out;
      for (Index k = 0; k < wanted; ++k) {
        const Index idx = order[static_cast<std::size_t>(k)];
        const Complex theta = ritz.eigenvalues()[idx];
        if (std::abs(theta) == 0.0) continue;
        ComplexVector x = V.leftCols(steps) * ritz.eigenvectors().col(idx);
        x.normalize();
        out.push_back({sigma + 1.0 / theta, std::move(x)});
      }
      return out;
    }
    start = next.normalized();
  }
  std::ostringstream msg;
  msg << "shift-invert Arnoldi did not converge after " << max_restarts
      << " restarts (worst relative Ritz residual " << worst << ")";
  throw Error(ErrorCode::iteration, msg.str(), worst);
}

}  // namespace delaytrack
