#pragma once

#include <optional>

#include "delaytrack/model.hpp"
#include "delaytrack/types.hpp"

namespace delaytrack {

/// Stochastic communication delay: constant part tau0 composed with the
/// packet-dropout transfer h_p and the Gamma-noise transfer h_s.
struct WamsSpec {
  double tau0 = 0.0;          // constant delay component [s]
  double dropout_rate = 0.0;  // packet dropout probability, in [0, 1)
  double period = 1.0;        // normal delivery period T [s]
  double gamma_scale = 0.0;   // alpha
  double gamma_shape = 0.0;   // b
  bool ideal_channel = false; // constant-delay limit: h_p = h_s = 1

  /// Throws configuration errors for out-of-domain fields.
  void validate() const;
};

// P(s) = sE - A0 - sum_j A_j exp(-s tau_j); pattern is the union of the inputs.
ComplexSparseMatrix characteristic_matrix(const DelayedLinearModel& model, Complex s);
// dP/ds = E + sum_j tau_j A_j exp(-s tau_j)
ComplexSparseMatrix characteristic_slope(const DelayedLinearModel& model, Complex s);

Complex dropout_transfer(const WamsSpec& spec, Complex s);        // h_p
Complex dropout_transfer_slope(const WamsSpec& spec, Complex s);  // dh_p/ds
Complex noise_transfer(const WamsSpec& spec, Complex s);          // h_s
Complex noise_transfer_slope(const WamsSpec& spec, Complex s);    // dh_s/ds

/// S_T = h_p h_s A1 exp(-s tau0); the model must have exactly one delay term.
ComplexSparseMatrix wams_delayed_matrix(const DelayedLinearModel& model, const WamsSpec& spec,
                                        Complex s);

/// S_TD = (dA1 h_p h_s + A1 (h_p' h_s + h_p h_s')) exp(-s tau0).
ComplexSparseMatrix wams_delayed_forcing(const DelayedLinearModel& model,
                                         const ModelDerivatives& derivatives,
                                         const WamsSpec& spec, Complex s);

/// A1 (h_p' h_s + h_p h_s') exp(-s tau0): the transfer-function part of S_TD,
/// i.e. dS_T/ds + tau0 S_T.
ComplexSparseMatrix wams_transfer_slope(const DelayedLinearModel& model, const WamsSpec& spec,
                                        Complex s);

/// The nonlinear eigenproblem P(s) phi = 0 in either the constant-delay or
/// the WAMS transfer-function form, with its s-derivative.
class CharacteristicFunction {
 public:
  explicit CharacteristicFunction(DelayedLinearModel model,
                                  std::optional<WamsSpec> wams = std::nullopt);

  ComplexSparseMatrix matrix(Complex s) const;
  ComplexSparseMatrix slope(Complex s) const;

  const DelayedLinearModel& model() const { return model_; }
  const std::optional<WamsSpec>& wams() const { return wams_; }
  Index dimension() const { return model_.dimension(); }

  /// ||P(s) phi||_2 / ||phi||_2
  double residual(Complex s, const ComplexVector& phi) const;

 private:
  DelayedLinearModel model_;
  std::optional<WamsSpec> wams_;
};

}  // namespace delaytrack
