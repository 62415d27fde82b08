#pragma once

// Reference continuation system built in complex arithmetic:
//   P(s) phi' + (dP/ds phi) s' = -(dP/dp) phi,   phi^T phi' = 0,
// then split into real and imaginary parts.

#include <complex>
#include <optional>

#include "delaytrack/charfun.hpp"
#include "delaytrack/model.hpp"
#include "delaytrack/track.hpp"

namespace oracle {

using namespace delaytrack;
using CMat = ComplexDenseMatrix;
using CVec = ComplexVector;

struct Reference {
  DenseMatrix M;
  Vector h;
};

inline CMat cd(const SparseMatrix& m) { return DenseMatrix(m).cast<Complex>(); }

/// h_p from its closed form.
inline Complex ref_dropout(const WamsSpec& w, Complex s) {
  if (w.ideal_channel) return 1.0;
  const double q = w.dropout_rate;
  const Complex e = std::exp(-s * w.period);
  return (1.0 - q) * (1.0 - e) / (s * (1.0 - q * e));
}

/// h_s on the principal branch.
inline Complex ref_noise(const WamsSpec& w, Complex s) {
  if (w.ideal_channel) return 1.0;
  return std::pow(1.0 + w.gamma_scale * s / (1.0 - w.dropout_rate), -w.gamma_shape);
}

/// Quotient rule on (1 - q) N / D with N = 1 - e^{-sT}, D = s (1 - q e^{-sT}).
inline Complex ref_dropout_slope(const WamsSpec& w, Complex s) {
  if (w.ideal_channel) return 0.0;
  const double q = w.dropout_rate, T = w.period;
  const Complex e = std::exp(-s * T);
  const Complex N = 1.0 - e, dN = T * e;
  const Complex D = s * (1.0 - q * e), dD = (1.0 - q * e) + s * q * T * e;
  return (1.0 - q) * (dN * D - N * dD) / (D * D);
}

inline Complex ref_noise_slope(const WamsSpec& w, Complex s) {
  if (w.ideal_channel) return 0.0;
  const double k = w.gamma_scale / (1.0 - w.dropout_rate);
  return -w.gamma_shape * k * std::pow(1.0 + k * s, -w.gamma_shape - 1.0);
}

/// Central difference of f at s with step d.
template <class F>
Complex central(F f, Complex s, double d = 1e-6) {
  return (f(s + d) - f(s - d)) / (2.0 * d);
}

struct Pieces {
  CMat K;   // P(s)
  CVec w;   // dP/ds phi
  CVec g;   // -(dP/dp) phi
};

inline Reference split(const Pieces& c, const CVec& phi) {
  const Index r = phi.size();
  Reference out;
  out.M = DenseMatrix::Zero(2 * r + 2, 2 * r + 2);
  out.M.block(0, 0, r, r) = c.K.real();
  out.M.block(0, r, r, r) = -c.K.imag();
  out.M.block(r, 0, r, r) = c.K.imag();
  out.M.block(r, r, r, r) = c.K.real();
  out.M.block(0, 2 * r, r, 1) = c.w.real();
  out.M.block(0, 2 * r + 1, r, 1) = -c.w.imag();
  out.M.block(r, 2 * r, r, 1) = c.w.imag();
  out.M.block(r, 2 * r + 1, r, 1) = c.w.real();
  out.M.block(2 * r, 0, 1, r) = phi.real().transpose();
  out.M.block(2 * r, r, 1, r) = -phi.imag().transpose();
  out.M.block(2 * r + 1, 0, 1, r) = phi.imag().transpose();
  out.M.block(2 * r + 1, r, 1, r) = phi.real().transpose();
  out.h = Vector::Zero(2 * r + 2);
  out.h.head(r) = c.g.real();
  out.h.segment(r, r) = c.g.imag();
  return out;
}

/// Constant delays, matrices moving with p (single and multi regimes).
inline Reference constant_delays(const DelayedLinearModel& m, const ModelDerivatives& d,
                                 const TrackState& st) {
  const Complex s = st.s();
  const CVec phi = st.phi();
  CMat P = s * cd(m.E) - cd(m.A0);
  CMat dPds = cd(m.E);
  CMat dPdp = s * cd(d.dE) - cd(d.dA0);
  for (std::size_t j = 0; j < m.delays.size(); ++j) {
    const Complex e = std::exp(-s * m.delays[j].tau);
    P -= cd(m.delays[j].A) * e;
    dPds += m.delays[j].tau * cd(m.delays[j].A) * e;
    dPdp -= cd(d.dA[j]) * e;
  }
  return split({P, dPds * phi, -(dPdp * phi)}, phi);
}

/// Delay term `l` has tau = p; its matrix does not move with p.
inline Reference varying_delay(const DelayedLinearModel& m, const ModelDerivatives& d,
                               const TrackState& st, Index l) {
  const Complex s = st.s();
  const CVec phi = st.phi();
  CMat P = s * cd(m.E) - cd(m.A0);
  CMat dPds = cd(m.E);
  CMat dPdp = s * cd(d.dE) - cd(d.dA0);
  for (std::size_t j = 0; j < m.delays.size(); ++j) {
    const double tau = m.delays[j].tau;
    const Complex e = std::exp(-s * tau);
    P -= cd(m.delays[j].A) * e;
    dPds += tau * cd(m.delays[j].A) * e;
    if (static_cast<Index>(j) == l)
      dPdp += s * cd(m.delays[j].A) * e;
    else
      dPdp -= cd(d.dA[j]) * e;
  }
  return split({P, dPds * phi, -(dPdp * phi)}, phi);
}

/// Single delay seen through the stochastic channel: A1 h_p(s) h_s(s) exp(-s tau0).
inline Reference wams(const DelayedLinearModel& m, const ModelDerivatives& d, const TrackState& st,
                      const WamsSpec& w) {
  const Complex s = st.s();
  const CVec phi = st.phi();
  auto gain = [&](Complex z) { return ref_dropout(w, z) * ref_noise(w, z) * std::exp(-z * w.tau0); };
  const CMat A1 = cd(m.delays.front().A);
  const CMat P = s * cd(m.E) - cd(m.A0) - A1 * gain(s);
  const Complex dgain = (ref_dropout_slope(w, s) * ref_noise(w, s) +
                         ref_dropout(w, s) * ref_noise_slope(w, s) -
                         w.tau0 * ref_dropout(w, s) * ref_noise(w, s)) *
                        std::exp(-s * w.tau0);
  const CMat dPds = cd(m.E) - A1 * dgain;
  const CMat dPdp = s * cd(d.dE) - cd(d.dA0) - cd(d.dA.front()) * gain(s);
  return split({P, dPds * phi, -(dPdp * phi)}, phi);
}

}  // namespace oracle
