#include "delaytrack/init.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseLU>
#include <lapacke.h>

#include "delaytrack/arnoldi.hpp"
#include "delaytrack/error.hpp"
#include "linalg_util.hpp"

namespace delaytrack {

namespace {

/// Chebyshev-Gauss-Lobatto points x_k = cos(k pi / N) and the spectral
/// differentiation matrix on [-1, 1].
void chebyshev(int N, std::vector<double>& x, DenseMatrix& D) {
  x.resize(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) x[static_cast<std::size_t>(k)] = std::cos(std::numbers::pi * k / N);
  D = DenseMatrix::Zero(N + 1, N + 1);
  auto c = [N](int k) { return (k == 0 || k == N) ? 2.0 : 1.0; };
  for (int i = 0; i <= N; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j <= N; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = c(i) / c(j) * sign / (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
      row_sum += D(i, j);
    }
    D(i, i) = -row_sum;
  }
}

/// Barycentric Lagrange weights of the point xi over the Lobatto nodes.
std::vector<double> interpolation_weights(const std::vector<double>& x, double xi) {
  const int N = static_cast<int>(x.size()) - 1;
  std::vector<double> ell(x.size(), 0.0);
  for (int k = 0; k <= N; ++k) {
    if (std::abs(xi - x[static_cast<std::size_t>(k)]) < 1e-14) {
      ell[static_cast<std::size_t>(k)] = 1.0;
      return ell;
    }
  }
  double total = 0.0;
  for (int k = 0; k <= N; ++k) {
    double w = (k % 2 == 0) ? 1.0 : -1.0;
    if (k == 0 || k == N) w *= 0.5;
    ell[static_cast<std::size_t>(k)] = w / (xi - x[static_cast<std::size_t>(k)]);
    total += ell[static_cast<std::size_t>(k)];
  }
  for (auto& v : ell) v /= total;
  return ell;
}

void append_block(std::vector<Triplet>& out, const SparseMatrix& m, Index row0, Index col0,
                  double scale) {
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

double pencil_residual(const SparseMatrix& A, const SparseMatrix& B, Complex s,
                       const ComplexVector& v) {
  const ComplexVector r = A.cast<Complex>() * v - s * (B.cast<Complex>() * v);
  return r.norm() / v.norm();
}

Eigensolution dense_generalized(const DiscretizedPencil& pencil, const SolveOptions& options) {
  const Index n = pencil.dimension();
  DenseMatrix A = DenseMatrix(pencil.sigma_A);
  DenseMatrix B = DenseMatrix(pencil.sigma_E);
  Vector alphar(n), alphai(n), beta(n);
  DenseMatrix VR(n, n);
  const lapack_int info =
      LAPACKE_dggev(LAPACK_COL_MAJOR, 'N', 'V', static_cast<lapack_int>(n), A.data(),
                    static_cast<lapack_int>(n), B.data(), static_cast<lapack_int>(n),
                    alphar.data(), alphai.data(), beta.data(), nullptr, 1, VR.data(),
                    static_cast<lapack_int>(n));
  if (info != 0)
    throw Error(ErrorCode::iteration, "dense QZ failed (dggev info " + std::to_string(info) + ")");

  Eigensolution out;
  for (Index j = 0; j < n; ++j) {
    ComplexVector v(n);
    if (alphai[j] == 0.0) {
      v = VR.col(j).cast<Complex>();
    } else if (alphai[j] > 0.0 && j + 1 < n) {
      v = VR.col(j).cast<Complex>() + Complex(0.0, 1.0) * VR.col(j + 1).cast<Complex>();
    } else {
      v = (VR.col(j - 1).cast<Complex>() - Complex(0.0, 1.0) * VR.col(j).cast<Complex>());
    }
    if (beta[j] == 0.0) continue;
    const Complex s = Complex(alphar[j], alphai[j]) / beta[j];
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()) ||
        std::abs(s) > options.infinite_threshold)
      continue;
    v.normalize();
    out.push_back({s, v, pencil_residual(pencil.sigma_A, pencil.sigma_E, s, v)});
  }
  return out;
}

void sort_descending_real(Eigensolution& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.s.real() != b.s.real()) return a.s.real() > b.s.real();
    return a.s.imag() > b.s.imag();
  });
}

}  // namespace

DiscretizedPencil discretize(const DelayedLinearModel& model, int degree) {
  const Index r = model.dimension();
  DiscretizedPencil pencil;
  pencil.block_size = r;
  pencil.endpoint_block = 0;

  if (model.delays.empty()) {
    pencil.degree = 0;
    pencil.sigma_A = model.A0;
    pencil.sigma_E = model.E;
    pencil.nodes = {0.0};
    return pencil;
  }
  if (degree < 2)
    throw Error(ErrorCode::configuration,
                "collocation degree N = " + std::to_string(degree) +
                    " cannot resolve the delays (need N >= 2)");

  const double tau_max = model.max_delay();
  std::vector<double> x;
  DenseMatrix D;
  chebyshev(degree, x, D);
  D *= 2.0 / tau_max;

  pencil.degree = degree;
  pencil.nodes.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) pencil.nodes[k] = 0.5 * tau_max * (x[k] - 1.0);

  const Index blocks = degree + 1;
  const Index dim = blocks * r;
  std::vector<Triplet> a_entries;
  std::vector<Triplet> e_entries;

  append_block(a_entries, model.A0, 0, 0, 1.0);
  for (const auto& term : model.delays) {
    const auto ell = interpolation_weights(x, 1.0 - 2.0 * term.tau / tau_max);
    for (Index k = 0; k < blocks; ++k)
      if (ell[static_cast<std::size_t>(k)] != 0.0)
        append_block(a_entries, term.A, 0, k * r, ell[static_cast<std::size_t>(k)]);
  }
  append_block(e_entries, model.E, 0, 0, 1.0);

  for (Index i = 1; i < blocks; ++i) {
    for (Index k = 0; k < blocks; ++k) {
      const double d = D(i, k);
      if (d == 0.0) continue;
      for (Index q = 0; q < r; ++q) a_entries.emplace_back(i * r + q, k * r + q, d);
    }
    for (Index q = 0; q < r; ++q) e_entries.emplace_back(i * r + q, i * r + q, 1.0);
  }

  pencil.sigma_A.resize(dim, dim);
  pencil.sigma_A.setFromTriplets(a_entries.begin(), a_entries.end());
  pencil.sigma_E.resize(dim, dim);
  pencil.sigma_E.setFromTriplets(e_entries.begin(), e_entries.end());
  return pencil;
}

Eigensolution solve_discretized(const DiscretizedPencil& pencil, Complex shift, int count,
                                const SolveOptions& options) {
  if (count < 1) throw Error(ErrorCode::configuration, "eigenvalue count must be >= 1");

  Eigensolution pairs;
  if (pencil.dimension() <= options.dense_limit) {
    pairs = dense_generalized(pencil, options);
    std::stable_sort(pairs.begin(), pairs.end(), [shift](const Eigenpair& a, const Eigenpair& b) {
      return std::abs(a.s - shift) < std::abs(b.s - shift);
    });
    if (static_cast<int>(pairs.size()) > count) pairs.resize(static_cast<std::size_t>(count));
  } else {
    auto ritz = shift_invert_arnoldi(pencil.sigma_A, pencil.sigma_E, shift, count,
                                     options.arnoldi_tol, options.arnoldi_max_restarts);
    for (auto& pair : ritz) {
      if (std::abs(pair.value) > options.infinite_threshold) continue;
      const double res = pencil_residual(pencil.sigma_A, pencil.sigma_E, pair.value, pair.vector);
      pairs.push_back({pair.value, std::move(pair.vector), res});
    }
  }
  sort_descending_real(pairs);
  return pairs;
}

ComplexVector lift_eigenvector(const DiscretizedPencil& pencil, const ComplexVector& v) {
  return v.segment(pencil.endpoint_block * pencil.block_size, pencil.block_size);
}

namespace {
constexpr double kDefectiveResidual = 1e-6;
}  // namespace

RefinedEigenpair refine_newton(const CharacteristicFunction& characteristic, Complex s0,
                               ComplexVector phi, const NewtonOptions& options) {
  const Index r = characteristic.dimension();
  if (phi.size() != r) throw Error(ErrorCode::dimension, "initial eigenvector has wrong length");
  if (phi.norm() == 0.0) throw Error(ErrorCode::configuration, "initial eigenvector is zero");

  const Complex gram = phi.transpose() * phi;
  if (std::abs(gram) > 1e-12 * phi.squaredNorm()) phi /= std::sqrt(gram);

  Complex s = s0;
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    const ComplexSparseMatrix P = characteristic.matrix(s);
    const ComplexVector Pphi = P * phi;
    const Complex norm_defect = Complex(phi.transpose() * phi) - 1.0;
    residual = Pphi.norm() / phi.norm();
    if (residual <= options.tol && std::abs(norm_defect) <= options.tol)
      return {s, phi, residual, iter};
    if (iter == options.max_iter) break;

    const ComplexVector dPphi = characteristic.slope(s) * phi;
    std::vector<ComplexTriplet> entries;
    entries.reserve(static_cast<std::size_t>(P.nonZeros() + 3 * r));
    for (Index k = 0; k < P.outerSize(); ++k)
      for (ComplexSparseMatrix::InnerIterator it(P, k); it; ++it)
        entries.emplace_back(it.row(), it.col(), it.value());
    for (Index i = 0; i < r; ++i) {
      if (dPphi[i] != Complex(0.0)) entries.emplace_back(i, r, dPphi[i]);
      if (phi[i] != Complex(0.0)) entries.emplace_back(r, i, phi[i]);
    }
    ComplexSparseMatrix J(r + 1, r + 1);
    J.setFromTriplets(entries.begin(), entries.end());
    J.makeCompressed();

    Eigen::SparseLU<ComplexSparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(J);
    const double rcond =
        lu.info() == Eigen::Success ? detail::reciprocal_condition(J, lu) : 0.0;
    if (rcond < options.singular_rcond) {
      std::ostringstream msg;
      msg << "bordered Newton Jacobian singular at s = " << s << " (rcond " << rcond
          << ", residual " << residual << ")";
      // Away from an eigenvalue this is a breakdown of the iteration, not a defective root.
      if (residual > kDefectiveResidual) throw Error(ErrorCode::non_convergence, msg.str(), residual);
      throw Error(ErrorCode::defective, msg.str(), rcond);
    }
    ComplexVector rhs(r + 1);
    rhs.head(r) = -Pphi;
    rhs[r] = -0.5 * norm_defect;
    const ComplexVector step = lu.solve(rhs);
    if (!step.allFinite()) throw Error(ErrorCode::nonfinite, "non-finite Newton step", residual);
    phi += step.head(r);
    s += step[r];
  }
  std::ostringstream msg;
  msg << "Newton refinement did not converge in " << options.max_iter
      << " iterations (last residual " << residual << ", s = " << s << ")";
  throw Error(ErrorCode::non_convergence, msg.str(), residual);
}

RefinedEigenpair refine_newton(const DelayedLinearModel& model, Complex s0, ComplexVector phi0,
                               const NewtonOptions& options) {
  return refine_newton(CharacteristicFunction(model), s0, std::move(phi0), options);
}

namespace {

/// Constant-delay model whose spectrum seeds the WAMS refinement: the
/// transfer functions are replaced by their low-frequency gain.
DelayedLinearModel wams_surrogate(const DelayedLinearModel& model, const WamsSpec& spec) {
  DelayedLinearModel surrogate = model;
  const double gain = spec.ideal_channel ? 1.0 : spec.period;
  const SparseMatrix A = gain * model.delays.front().A;
  if (spec.tau0 > 0.0) {
    surrogate.delays.front() = {spec.tau0, A};
  } else {
    surrogate.delays.clear();
    surrogate.A0 = model.A0 + A;
  }
  return surrogate;
}

}  // namespace

Eigensolution initial_eigenpairs(const CharacteristicFunction& characteristic,
                                 const InitSettings& settings) {
  const DelayedLinearModel seed_model =
      characteristic.wams() ? wams_surrogate(characteristic.model(), *characteristic.wams())
                            : characteristic.model();
  const auto pencil = discretize(seed_model, settings.degree);
  const auto candidates = solve_discretized(pencil, settings.shift, settings.count, settings.solve);

  Eigensolution refined;
  for (const auto& candidate : candidates) {
    try {
      auto pair = refine_newton(characteristic, candidate.s, lift_eigenvector(pencil, candidate.phi),
                                settings.newton);
      const bool duplicate = std::any_of(refined.begin(), refined.end(), [&](const Eigenpair& e) {
        return std::abs(e.s - pair.s) < 1e-8 * std::max(1.0, std::abs(pair.s));
      });
      if (!duplicate) refined.push_back({pair.s, std::move(pair.phi), pair.residual});
    } catch (const Error&) {
      // candidate did not refine; it is not reported
    }
  }
  sort_descending_real(refined);
  return refined;
}

ComplexVector approximate_null_vector(const CharacteristicFunction& characteristic, Complex s) {
  const Index r = characteristic.dimension();
  Eigen::SparseLU<ComplexSparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  Complex point = s;
  for (int attempt = 0;; ++attempt) {
    ComplexSparseMatrix P = characteristic.matrix(point);
    P.makeCompressed();
    lu.compute(P);
    if (lu.info() == Eigen::Success) break;
    if (attempt == 3) throw Error(ErrorCode::singularity, "cannot factor P near the seed");
    point += 1e-8 * (1.0 + std::abs(point)) * Complex(1.0, 0.5);
  }
  ComplexVector x = ComplexVector::Ones(r);
  for (int iter = 0; iter < 4; ++iter) {
    ComplexVector y = lu.solve(x);
    if (!y.allFinite() || y.norm() == 0.0) break;
    x = y / y.norm();
  }
  return x;
}

}  // namespace delaytrack
