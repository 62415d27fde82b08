#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "delaytrack/error.hpp"
#include "delaytrack/track.hpp"
#include "linalg_util.hpp"

namespace delaytrack {

TrackState TrackState::from(double p, Complex s, const ComplexVector& phi, double residual) {
  TrackState out;
  out.p = p;
  out.phi_r = phi.real();
  out.phi_i = phi.imag();
  out.s_r = s.real();
  out.s_i = s.imag();
  out.residual = residual;
  return out;
}

ComplexVector TrackState::phi() const {
  ComplexVector out(phi_r.size());
  out.real() = phi_r;
  out.imag() = phi_i;
  return out;
}

Vector TrackState::packed() const {
  const Index r = phi_r.size();
  Vector y(2 * r + 2);
  y.head(r) = phi_r;
  y.segment(r, r) = phi_i;
  y[2 * r] = s_r;
  y[2 * r + 1] = s_i;
  return y;
}

void TrackState::unpack(const Vector& y) {
  const Index r = (y.size() - 2) / 2;
  phi_r = y.head(r);
  phi_i = y.segment(r, r);
  s_r = y[2 * r];
  s_i = y[2 * r + 1];
}

namespace {

/// exp(-s tau) split as (h_r, h_i) = e^{-s_r tau} (cos(s_i tau), sin(s_i tau)).
std::pair<double, double> delay_factor(double s_r, double s_i, double tau) {
  const double mag = std::exp(-s_r * tau);
  if (!std::isfinite(mag)) {
    std::ostringstream msg;
    msg << "exp(-s tau) overflows at s_r = " << s_r << ", tau = " << tau;
    throw Error(ErrorCode::nonfinite, msg.str());
  }
  return {mag * std::cos(s_i * tau), mag * std::sin(s_i * tau)};
}

void put(std::vector<Triplet>& out, const SparseMatrix& m, Index row0, Index col0, double scale) {
  if (scale == 0.0) return;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

void put_column(std::vector<Triplet>& out, const Vector& v, Index row0, Index col, double scale) {
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out.emplace_back(row0 + i, col, scale * v[i]);
}

void put_row(std::vector<Triplet>& out, const Vector& v, Index row, Index col0, double scale) {
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out.emplace_back(row, col0 + i, scale * v[i]);
}

/// Builds M = [[K_r, -K_i, w_r, -w_i], [K_i, K_r, w_i, w_r],
///             [phi_r^T, -phi_i^T, 0, 0], [phi_i^T, phi_r^T, 0, 0]]
/// and h = [g_r; g_i; 0; 0].
ContinuationSystem compose(const SparseMatrix& K_r, const SparseMatrix& K_i, const Vector& w_r,
                           const Vector& w_i, const TrackState& state, const Vector& g_r,
                           const Vector& g_i) {
  const Index r = state.phi_r.size();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * (K_r.nonZeros() + K_i.nonZeros()) + 8 * r));
  put(t, K_r, 0, 0, 1.0);
  put(t, K_i, 0, r, -1.0);
  put(t, K_i, r, 0, 1.0);
  put(t, K_r, r, r, 1.0);
  put_column(t, w_r, 0, 2 * r, 1.0);
  put_column(t, w_i, 0, 2 * r + 1, -1.0);
  put_column(t, w_i, r, 2 * r, 1.0);
  put_column(t, w_r, r, 2 * r + 1, 1.0);
  put_row(t, state.phi_r, 2 * r, 0, 1.0);
  put_row(t, state.phi_i, 2 * r, r, -1.0);
  put_row(t, state.phi_i, 2 * r + 1, 0, 1.0);
  put_row(t, state.phi_r, 2 * r + 1, r, 1.0);

  ContinuationSystem out;
  out.M.resize(2 * r + 2, 2 * r + 2);
  out.M.setFromTriplets(t.begin(), t.end());
  out.h = Vector::Zero(2 * r + 2);
  out.h.head(r) = g_r;
  out.h.segment(r, r) = g_i;
  return out;
}

void check_state(const DelayedLinearModel& model, const TrackState& state) {
  const Index r = model.dimension();
  if (state.phi_r.size() != r || state.phi_i.size() != r) {
    std::ostringstream msg;
    msg << "state eigenvector has length " << state.phi_r.size() << ", model dimension is " << r;
    throw Error(ErrorCode::dimension, msg.str());
  }
}

/// Stacked mu-block data for the delays in `terms`.
struct Stacked {
  SparseMatrix C, S, CD, SD;  // (mu r) x r
  SparseMatrix J_mu, J_tau;   // r x (mu r)
};

Stacked stack_delays(const DelayedLinearModel& model, const ModelDerivatives& derivatives,
                     const std::vector<Index>& terms, double s_r, double s_i) {
  const Index r = model.dimension();
  const auto mu = static_cast<Index>(terms.size());
  std::vector<Triplet> c, s, cd, sd, jm, jt;
  for (Index b = 0; b < mu; ++b) {
    const auto j = static_cast<std::size_t>(terms[static_cast<std::size_t>(b)]);
    const auto& term = model.delays[j];
    const auto [h_r, h_i] = delay_factor(s_r, s_i, term.tau);
    put(c, term.A, b * r, 0, h_r);
    put(s, term.A, b * r, 0, h_i);
    put(cd, derivatives.dA[j], b * r, 0, h_r);
    put(sd, derivatives.dA[j], b * r, 0, h_i);
    for (Index i = 0; i < r; ++i) {
      jm.emplace_back(i, b * r + i, 1.0);
      jt.emplace_back(i, b * r + i, term.tau);
    }
  }
  Stacked out;
  auto build = [](SparseMatrix& m, Index rows, Index cols, const std::vector<Triplet>& t) {
    m.resize(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
  };
  build(out.C, mu * r, r, c);
  build(out.S, mu * r, r, s);
  build(out.CD, mu * r, r, cd);
  build(out.SD, mu * r, r, sd);
  build(out.J_mu, r, mu * r, jm);
  build(out.J_tau, r, mu * r, jt);
  return out;
}

void check_derivatives(const DelayedLinearModel& model, const ModelDerivatives& derivatives) {
  if (derivatives.dA.size() != model.delays.size())
    throw Error(ErrorCode::dimension, "derivative count does not match the delay terms");
}

}  // namespace

ContinuationSystem assemble_single(const DelayedLinearModel& model,
                                   const ModelDerivatives& derivatives, const TrackState& state) {
  if (model.delay_count() != 1)
    throw Error(ErrorCode::configuration, "single-delay regime needs exactly one delay term");
  check_state(model, state);
  check_derivatives(model, derivatives);
  const double s_r = state.s_r, s_i = state.s_i;
  const auto& term = model.delays.front();
  const double tau = term.tau;
  const auto [h_r, h_i] = delay_factor(s_r, s_i, tau);

  const SparseMatrix C = h_r * term.A;
  const SparseMatrix S = h_i * term.A;
  const SparseMatrix CD = h_r * derivatives.dA.front();
  const SparseMatrix SD = h_i * derivatives.dA.front();

  const SparseMatrix K_r = s_r * model.E - model.A0 - C;
  const SparseMatrix K_i = s_i * model.E + S;
  const Vector& pr = state.phi_r;
  const Vector& pi = state.phi_i;
  const Vector w_r = model.E * pr + tau * (C * pr + S * pi);
  const Vector w_i = model.E * pi + tau * (C * pi - S * pr);

  const SparseMatrix G1 = -s_r * derivatives.dE + derivatives.dA0 + CD;
  const SparseMatrix G2 = s_i * derivatives.dE + SD;
  const Vector g_r = G1 * pr + G2 * pi;
  const Vector g_i = -(G2 * pr) + G1 * pi;
  return compose(K_r, K_i, w_r, w_i, state, g_r, g_i);
}

ContinuationSystem assemble_multi(const DelayedLinearModel& model,
                                  const ModelDerivatives& derivatives, const TrackState& state) {
  check_state(model, state);
  check_derivatives(model, derivatives);
  const double s_r = state.s_r, s_i = state.s_i;
  std::vector<Index> all(model.delays.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<Index>(j);
  const Stacked st = stack_delays(model, derivatives, all, s_r, s_i);

  const SparseMatrix JC = st.J_mu * st.C;
  const SparseMatrix JS = st.J_mu * st.S;
  const SparseMatrix K_r = s_r * model.E - model.A0 - JC;
  const SparseMatrix K_i = s_i * model.E + JS;
  const Vector& pr = state.phi_r;
  const Vector& pi = state.phi_i;
  const Vector w_r = model.E * pr + st.J_tau * (st.C * pr + st.S * pi);
  const Vector w_i = model.E * pi + st.J_tau * (st.C * pi - st.S * pr);

  const SparseMatrix G1 = -s_r * derivatives.dE + derivatives.dA0 + SparseMatrix(st.J_mu * st.CD);
  const SparseMatrix G2 = s_i * derivatives.dE + SparseMatrix(st.J_mu * st.SD);
  const Vector g_r = G1 * pr + G2 * pi;
  const Vector g_i = -(G2 * pr) + G1 * pi;
  return compose(K_r, K_i, w_r, w_i, state, g_r, g_i);
}

ContinuationSystem assemble_delay_param(const DelayedLinearModel& model,
                                        const ModelDerivatives& derivatives,
                                        const TrackState& state, Index delay_index) {
  check_state(model, state);
  check_derivatives(model, derivatives);
  if (delay_index < 0 || delay_index >= model.delay_count()) {
    std::ostringstream msg;
    msg << "delay index " << delay_index << " outside 0.." << model.delay_count() - 1;
    throw Error(ErrorCode::configuration, msg.str());
  }
  const double s_r = state.s_r, s_i = state.s_i;
  const auto& varying = model.delays[static_cast<std::size_t>(delay_index)];
  const double p = varying.tau;
  const auto [hr, hi] = delay_factor(s_r, s_i, p);
  const SparseMatrix C_l = hr * varying.A;
  const SparseMatrix S_l = hi * varying.A;

  std::vector<Index> others;
  for (Index j = 0; j < model.delay_count(); ++j)
    if (j != delay_index) others.push_back(j);
  const Stacked st = stack_delays(model, derivatives, others, s_r, s_i);

  const SparseMatrix K_r = s_r * model.E - model.A0 - C_l - SparseMatrix(st.J_mu * st.C);
  const SparseMatrix K_i = s_i * model.E + S_l + SparseMatrix(st.J_mu * st.S);
  const Vector& pr = state.phi_r;
  const Vector& pi = state.phi_i;
  const Vector w_r =
      model.E * pr + st.J_tau * (st.C * pr + st.S * pi) + p * (C_l * pr + S_l * pi);
  const Vector w_i =
      model.E * pi + st.J_tau * (st.C * pi - st.S * pr) - p * (S_l * pr - C_l * pi);

  const SparseMatrix H1 = derivatives.dA0 - s_r * derivatives.dE - s_r * C_l - s_i * S_l;
  const SparseMatrix H2 = s_i * derivatives.dE + s_i * C_l - s_r * S_l;
  const Vector g_r = H1 * pr + H2 * pi;
  const Vector g_i = -(H2 * pr) + H1 * pi;
  return compose(K_r, K_i, w_r, w_i, state, g_r, g_i);
}

ContinuationSystem assemble_wams(const DelayedLinearModel& model,
                                 const ModelDerivatives& derivatives, const TrackState& state,
                                 const WamsSpec& wams) {
  if (model.delay_count() != 1)
    throw Error(ErrorCode::configuration, "WAMS regime needs exactly one delay term");
  check_state(model, state);
  check_derivatives(model, derivatives);
  const double s_r = state.s_r, s_i = state.s_i;
  const Complex s{s_r, s_i};

  const ComplexSparseMatrix ST = wams_delayed_matrix(model, wams, s);
  const ComplexSparseMatrix slope = wams_transfer_slope(model, wams, s);
  const SparseMatrix ST_r = ST.real();
  const SparseMatrix ST_i = ST.imag();
  const SparseMatrix SL_r = slope.real();
  const SparseMatrix SL_i = slope.imag();

  const Complex gain = dropout_transfer(wams, s) * noise_transfer(wams, s) * std::exp(-s * wams.tau0);
  if (!std::isfinite(gain.real()) || !std::isfinite(gain.imag()))
    throw Error(ErrorCode::nonfinite, "WAMS transfer gain is not finite");
  const SparseMatrix& dA1 = derivatives.dA.front();
  const SparseMatrix D_r = gain.real() * dA1;
  const SparseMatrix D_i = gain.imag() * dA1;

  const SparseMatrix K_r = s_r * model.E - model.A0 - ST_r;
  const SparseMatrix K_i = s_i * model.E - ST_i;
  const Vector& pr = state.phi_r;
  const Vector& pi = state.phi_i;
  const double t0 = wams.tau0;
  const Vector w_r = model.E * pr + t0 * (ST_r * pr - ST_i * pi) - (SL_r * pr - SL_i * pi);
  const Vector w_i = model.E * pi + t0 * (ST_i * pr + ST_r * pi) - (SL_i * pr + SL_r * pi);

  const SparseMatrix G1 = -s_r * derivatives.dE + derivatives.dA0 + D_r;
  const SparseMatrix G2 = s_i * derivatives.dE - D_i;
  const Vector g_r = G1 * pr + G2 * pi;
  const Vector g_i = -(G2 * pr) + G1 * pi;
  return compose(K_r, K_i, w_r, w_i, state, g_r, g_i);
}

ContinuationSystem assemble(const RegimeSpec& regime, const DelayedLinearModel& model,
                            const ModelDerivatives& derivatives, const TrackState& state) {
  switch (regime.regime) {
    case Regime::single:
      return assemble_single(model, derivatives, state);
    case Regime::multi:
      return assemble_multi(model, derivatives, state);
    case Regime::delay_param:
      return assemble_delay_param(model, derivatives, state, regime.delay_index);
    case Regime::wams:
      if (!regime.wams) throw Error(ErrorCode::configuration, "WAMS regime without channel data");
      return assemble_wams(model, derivatives, state, *regime.wams);
  }
  throw Error(ErrorCode::unknown_regime, "unknown regime");
}

CharacteristicFunction characteristic_for(const RegimeSpec& regime,
                                          const DelayedLinearModel& model) {
  if (regime.regime == Regime::wams) {
    if (!regime.wams) throw Error(ErrorCode::configuration, "WAMS regime without channel data");
    return CharacteristicFunction(model, regime.wams);
  }
  return CharacteristicFunction(model);
}

Vector solve_tangent(const ContinuationSystem& system, double singular_rcond) {
  SparseMatrix M = system.M;
  M.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success)
    throw Error(ErrorCode::defective, "continuation matrix is singular", 0.0);
  const double rcond = detail::reciprocal_condition(M, lu);
  if (rcond < singular_rcond) {
    std::ostringstream msg;
    msg << "continuation matrix is singular to working precision (rcond " << rcond << ")";
    throw Error(ErrorCode::defective, msg.str(), rcond);
  }
  Vector dy = lu.solve(system.h);
  if (!dy.allFinite()) throw Error(ErrorCode::nonfinite, "tangent solve produced non-finite values");
  return dy;
}

}  // namespace delaytrack
