#include "delaytrack/charfun.hpp"

#include <cmath>
#include <sstream>

#include "delaytrack/error.hpp"

namespace delaytrack {

namespace {

Complex delay_factor(Complex s, double tau) {
  const Complex value = std::exp(-s * tau);
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    std::ostringstream msg;
    msg << "exp(-s tau) overflows at s = " << s << ", tau = " << tau;
    throw Error(ErrorCode::nonfinite, msg.str());
  }
  return value;
}

ComplexSparseMatrix as_complex(const SparseMatrix& m) { return m.cast<Complex>(); }

void require_single_delay(const DelayedLinearModel& model) {
  if (model.delay_count() != 1)
    throw Error(ErrorCode::configuration,
                "WAMS transfer model needs exactly one delayed term, got " +
                    std::to_string(model.delay_count()));
}

bool is_integer(double b) { return std::floor(b) == b; }

}  // namespace

void WamsSpec::validate() const {
  if (!(tau0 >= 0.0)) throw Error(ErrorCode::configuration, "WAMS tau0 must be >= 0");
  if (ideal_channel) return;
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw Error(ErrorCode::configuration, "WAMS dropout rate must lie in [0, 1)");
  if (!(period > 0.0)) throw Error(ErrorCode::configuration, "WAMS period must be > 0");
  if (!(gamma_scale >= 0.0)) throw Error(ErrorCode::configuration, "WAMS alpha must be >= 0");
  if (!(gamma_shape >= 0.0)) throw Error(ErrorCode::configuration, "WAMS b must be >= 0");
}

ComplexSparseMatrix characteristic_matrix(const DelayedLinearModel& model, Complex s) {
  ComplexSparseMatrix P = s * as_complex(model.E) - as_complex(model.A0);
  for (const auto& term : model.delays) P -= delay_factor(s, term.tau) * as_complex(term.A);
  P.makeCompressed();
  return P;
}

ComplexSparseMatrix characteristic_slope(const DelayedLinearModel& model, Complex s) {
  ComplexSparseMatrix dP = as_complex(model.E);
  for (const auto& term : model.delays)
    dP += (term.tau * delay_factor(s, term.tau)) * as_complex(term.A);
  dP.makeCompressed();
  return dP;
}

Complex dropout_transfer(const WamsSpec& spec, Complex s) {
  if (spec.ideal_channel) return 1.0;
  if (s == Complex(0.0)) throw Error(ErrorCode::singularity, "h_p is singular at s = 0");
  const double p = spec.dropout_rate;
  const Complex e = delay_factor(s, spec.period);
  const Complex den = 1.0 - p * e;
  if (std::abs(den) < 1e-14) throw Error(ErrorCode::singularity, "h_p denominator vanishes");
  return ((1.0 - p) / s) * (1.0 + (p - 1.0) * e / den);
}

Complex dropout_transfer_slope(const WamsSpec& spec, Complex s) {
  if (spec.ideal_channel) return 0.0;
  if (s == Complex(0.0)) throw Error(ErrorCode::singularity, "h_p is singular at s = 0");
  // h_p = (1-p)(1-e) / (s (1 - p e)),  e = exp(-sT),  de/ds = -T e
  const double p = spec.dropout_rate;
  const double T = spec.period;
  const Complex e = delay_factor(s, T);
  const Complex den = 1.0 - p * e;
  if (std::abs(den) < 1e-14) throw Error(ErrorCode::singularity, "h_p denominator vanishes");
  const Complex num = 1.0 - e;
  const Complex num_ds = T * e;
  const Complex D = s * den;
  const Complex D_ds = den + s * p * T * e;
  return (1.0 - p) * (num_ds * D - num * D_ds) / (D * D);
}

namespace {

Complex noise_base(const WamsSpec& spec, Complex s) {
  const Complex z = 1.0 + spec.gamma_scale / (1.0 - spec.dropout_rate) * s;
  const double b = spec.gamma_shape;
  if (b != 0.0 && z.imag() == 0.0 && z.real() <= 0.0 && (!is_integer(b) || z.real() == 0.0)) {
    std::ostringstream msg;
    msg << "h_s base " << z << " lies on the branch cut / pole for b = " << b;
    throw Error(ErrorCode::singularity, msg.str());
  }
  return z;
}

}  // namespace

Complex noise_transfer(const WamsSpec& spec, Complex s) {
  if (spec.ideal_channel || spec.gamma_shape == 0.0 || spec.gamma_scale == 0.0) return 1.0;
  return std::pow(noise_base(spec, s), -spec.gamma_shape);
}

Complex noise_transfer_slope(const WamsSpec& spec, Complex s) {
  if (spec.ideal_channel || spec.gamma_shape == 0.0 || spec.gamma_scale == 0.0) return 0.0;
  const double k = spec.gamma_scale / (1.0 - spec.dropout_rate);
  const double b = spec.gamma_shape;
  return -b * k * std::pow(noise_base(spec, s), -b - 1.0);
}

ComplexSparseMatrix wams_delayed_matrix(const DelayedLinearModel& model, const WamsSpec& spec,
                                        Complex s) {
  require_single_delay(model);
  const Complex scale =
      dropout_transfer(spec, s) * noise_transfer(spec, s) * delay_factor(s, spec.tau0);
  return scale * as_complex(model.delays.front().A);
}

ComplexSparseMatrix wams_transfer_slope(const DelayedLinearModel& model, const WamsSpec& spec,
                                        Complex s) {
  require_single_delay(model);
  const Complex hp = dropout_transfer(spec, s);
  const Complex hs = noise_transfer(spec, s);
  const Complex scale =
      (dropout_transfer_slope(spec, s) * hs + hp * noise_transfer_slope(spec, s)) *
      delay_factor(s, spec.tau0);
  return scale * as_complex(model.delays.front().A);
}

ComplexSparseMatrix wams_delayed_forcing(const DelayedLinearModel& model,
                                         const ModelDerivatives& derivatives,
                                         const WamsSpec& spec, Complex s) {
  require_single_delay(model);
  if (derivatives.dA.size() != 1)
    throw Error(ErrorCode::configuration, "WAMS forcing needs one delayed-matrix derivative");
  const Complex gain =
      dropout_transfer(spec, s) * noise_transfer(spec, s) * delay_factor(s, spec.tau0);
  ComplexSparseMatrix out = gain * as_complex(derivatives.dA.front());
  out += wams_transfer_slope(model, spec, s);
  out.makeCompressed();
  return out;
}

CharacteristicFunction::CharacteristicFunction(DelayedLinearModel model,
                                               std::optional<WamsSpec> wams)
    : model_(std::move(model)), wams_(std::move(wams)) {
  if (wams_) {
    wams_->validate();
    require_single_delay(model_);
  }
}

ComplexSparseMatrix CharacteristicFunction::matrix(Complex s) const {
  if (!wams_) return characteristic_matrix(model_, s);
  ComplexSparseMatrix P = s * as_complex(model_.E) - as_complex(model_.A0);
  P -= wams_delayed_matrix(model_, *wams_, s);
  P.makeCompressed();
  return P;
}

ComplexSparseMatrix CharacteristicFunction::slope(Complex s) const {
  if (!wams_) return characteristic_slope(model_, s);
  // d/ds S_T = transfer slope - tau0 S_T
  ComplexSparseMatrix dP = as_complex(model_.E);
  dP += wams_->tau0 * wams_delayed_matrix(model_, *wams_, s);
  dP -= wams_transfer_slope(model_, *wams_, s);
  dP.makeCompressed();
  return dP;
}

double CharacteristicFunction::residual(Complex s, const ComplexVector& phi) const {
  const double norm = phi.norm();
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  return (matrix(s) * phi).norm() / norm;
}

}  // namespace delaytrack
