#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "delaytrack/model.hpp"
#include "delaytrack/track.hpp"

namespace fixtures {

using namespace delaytrack;

inline SparseMatrix dense_to_sparse(const DenseMatrix& d) {
  SparseMatrix m = d.sparseView();
  m.makeCompressed();
  return m;
}

inline SparseMatrix scalar(double v) {
  DenseMatrix d(1, 1);
  d(0, 0) = v;
  return dense_to_sparse(d);
}

inline SparseMatrix mat2(double a, double b, double c, double d) {
  DenseMatrix m(2, 2);
  m << a, b, c, d;
  return dense_to_sparse(m);
}

/// x' = a x + b x(t - tau)
inline DelayedLinearModel hayes(double a = 0.0, double b = -1.0, double tau = 1.0) {
  DelayedLinearModel m;
  m.E = scalar(1.0);
  m.A0 = scalar(a);
  m.delays.push_back({tau, scalar(b)});
  return m;
}

/// x' = -x(t - p) over [lo, hi]
inline ModelFamily hayes_family(double lo = 1.0, double hi = 2.0) {
  return ModelFamily::delay_parameter(hayes(), 0, {lo, hi});
}

/// A0(p) = [[0, 1], [-1, -p]], eigenvalues (-p +- sqrt(p^2 - 4)) / 2
inline ModelFamily quadratic_family(double lo = 0.1, double hi = 1.0) {
  AffineData d;
  d.E.constant = mat2(1, 0, 0, 1);
  d.A0.constant = mat2(0, 1, -1, 0);
  d.A0.slope = mat2(0, 0, 0, -1);
  return ModelFamily::affine(d, {lo, hi});
}

/// A0(p) = [[0, 1], [-(2 - p), -2]], eigenvalues -1 +- sqrt(p - 1): fold at p = 1
inline ModelFamily fold_family(double lo = 0.0, double hi = 2.0) {
  AffineData d;
  d.E.constant = mat2(1, 0, 0, 1);
  d.A0.constant = mat2(0, 1, -2, -2);
  d.A0.slope = mat2(0, 0, 1, 0);
  return ModelFamily::affine(d, {lo, hi});
}

/// Real part a(p) = 0.25 - (p - 1)^2 crosses zero at p = 0.5 and p = 1.5.
inline double two_crossing_real(double p) { return 0.25 - (p - 1.0) * (p - 1.0); }

/// [[a(p) + c, w], [-w, a(p) - c]] sampled on a grid: eigenvalues a(p) +- sqrt(c^2 - w^2).
inline ModelFamily two_crossing_family(int snapshots = 401) {
  TabulatedData t;
  const double c = 0.1, w = 1.0;
  for (int k = 0; k < snapshots; ++k) {
    const double p = 2.0 * k / (snapshots - 1);
    DelayedLinearModel m;
    m.E = mat2(1, 0, 0, 1);
    const double a = two_crossing_real(p);
    m.A0 = mat2(a + c, w, -w, a - c);
    t.snapshots.push_back({p, m});
  }
  return ModelFamily::tabulated(t, {0.0, 2.0});
}

/// Random sparse r x r matrix with entries in [-1, 1].
inline SparseMatrix random_sparse(Index r, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<Triplet> t;
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      if (keep(rng)) t.emplace_back(i, j, u(rng));
  SparseMatrix m(r, r);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline DelayedLinearModel random_model(Index r, int mu, std::mt19937_64& rng, double density = 0.4) {
  std::uniform_real_distribution<double> tau(0.1, 2.0);
  DelayedLinearModel m;
  m.E = random_sparse(r, density, rng);
  m.A0 = random_sparse(r, density, rng);
  for (int j = 0; j < mu; ++j) m.delays.push_back({tau(rng), random_sparse(r, density, rng)});
  return m;
}

inline ModelDerivatives random_derivatives(Index r, int mu, std::mt19937_64& rng,
                                           double density = 0.4) {
  ModelDerivatives d;
  d.dE = random_sparse(r, density, rng);
  d.dA0 = random_sparse(r, density, rng);
  for (int j = 0; j < mu; ++j) d.dA.push_back(random_sparse(r, density, rng));
  return d;
}

inline TrackState random_state(Index r, std::mt19937_64& rng, double p = 0.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrackState s;
  s.p = p;
  s.phi_r = Vector::NullaryExpr(r, [&] { return u(rng); });
  s.phi_i = Vector::NullaryExpr(r, [&] { return u(rng); });
  s.s_r = u(rng);
  s.s_i = 2.0 * u(rng);
  return s;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace fixtures
