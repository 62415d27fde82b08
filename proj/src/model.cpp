#include "delaytrack/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delaytrack/error.hpp"

namespace delaytrack {

double DelayedLinearModel::max_delay() const {
  double tau_max = 0.0;
  for (const auto& term : delays) tau_max = std::max(tau_max, term.tau);
  return tau_max;
}

std::vector<ModelDiagnostic> validate_model(const DelayedLinearModel& model) {
  std::vector<ModelDiagnostic> report;
  const Index r = model.E.rows();
  auto check_square = [&](const SparseMatrix& m, const std::string& name) {
    if (m.rows() != r || m.cols() != r) {
      std::ostringstream msg;
      msg << name << " is " << m.rows() << "x" << m.cols() << ", expected " << r << "x" << r;
      report.push_back({ModelViolation::dimension, msg.str()});
    }
  };
  if (r == 0) report.push_back({ModelViolation::dimension, "model has zero dimension"});
  check_square(model.E, "E");
  check_square(model.A0, "A0");
  for (std::size_t j = 0; j < model.delays.size(); ++j) {
    const auto& term = model.delays[j];
    check_square(term.A, "A" + std::to_string(j + 1));
    if (!(term.tau > 0.0) || !std::isfinite(term.tau)) {
      std::ostringstream msg;
      msg << "delay " << j + 1 << " has non-positive value " << term.tau;
      report.push_back({ModelViolation::nonpositive_delay, msg.str()});
    }
  }
  if (model.n_dyn) {
    const Index n = *model.n_dyn;
    if (n < 0 || n > r) {
      report.push_back({ModelViolation::dimension, "n_dyn outside [0, r]"});
    } else if (model.E.cols() == r) {
      for (Index col = n; col < r; ++col) {
        for (SparseMatrix::InnerIterator it(model.E, col); it; ++it) {
          if (it.value() != 0.0) {
            std::ostringstream msg;
            msg << "E(" << it.row() + 1 << "," << col + 1
                << ") is nonzero in an algebraic column (n_dyn = " << n << ")";
            report.push_back({ModelViolation::mass_structure, msg.str()});
            break;
          }
        }
      }
    }
  }
  return report;
}

namespace {

SparseMatrix zero_like(Index r) { return SparseMatrix(r, r); }

SparseMatrix slot_value(const AffineSlot& slot, double p) {
  if (slot.slope.size() == 0) return slot.constant;
  SparseMatrix value = slot.constant + p * slot.slope;
  value.makeCompressed();
  return value;
}

SparseMatrix slot_slope(const AffineSlot& slot, Index r) {
  return slot.slope.size() == 0 ? zero_like(r) : slot.slope;
}

void require_square(const SparseMatrix& m, Index r, const std::string& name) {
  if (m.rows() != r || m.cols() != r) {
    std::ostringstream msg;
    msg << name << " is " << m.rows() << "x" << m.cols() << ", expected " << r << "x" << r;
    throw Error(ErrorCode::dimension, msg.str());
  }
}

void require_valid(const DelayedLinearModel& model, const std::string& context) {
  auto report = validate_model(model);
  if (!report.empty()) {
    const auto code = report.front().kind == ModelViolation::dimension ? ErrorCode::dimension
                                                                        : ErrorCode::configuration;
    throw Error(code, context + ": " + report.front().message);
  }
}

SparseMatrix lerp(const SparseMatrix& a, const SparseMatrix& b, double t) {
  SparseMatrix out = (1.0 - t) * a + t * b;
  out.makeCompressed();
  return out;
}

}  // namespace

ModelFamily::ModelFamily(Data data, ParameterRange range, std::optional<double> fd_step)
    : data_(std::move(data)), range_(range), fd_step_(fd_step) {
  if (!(range_.lo <= range_.hi))
    throw Error(ErrorCode::configuration, "parameter range must satisfy lo <= hi");
  if (fd_step_ && !(*fd_step_ > 0.0))
    throw Error(ErrorCode::configuration, "fd_step must be positive");
}

ModelFamily ModelFamily::affine(AffineData data, ParameterRange range,
                                std::optional<double> fd_step) {
  const Index r = data.E.constant.rows();
  require_square(data.E.constant, r, "E");
  require_square(data.A0.constant, r, "A0");
  if (data.E.slope.size() != 0) require_square(data.E.slope, r, "E slope");
  if (data.A0.slope.size() != 0) require_square(data.A0.slope, r, "A0 slope");
  if (data.taus.size() != data.delayed.size())
    throw Error(ErrorCode::configuration, "affine family: one delay value per delayed matrix");
  for (std::size_t j = 0; j < data.delayed.size(); ++j) {
    require_square(data.delayed[j].constant, r, "A" + std::to_string(j + 1));
    if (data.delayed[j].slope.size() != 0)
      require_square(data.delayed[j].slope, r, "A" + std::to_string(j + 1) + " slope");
  }
  ModelFamily family(std::move(data), range, fd_step);
  family.dimension_ = r;
  family.delay_count_ = static_cast<Index>(std::get<AffineData>(family.data_).taus.size());
  require_valid(family.evaluate(range.lo), "affine family at p_lo");
  return family;
}

ModelFamily ModelFamily::tabulated(TabulatedData data, ParameterRange range,
                                   std::optional<double> fd_step) {
  auto& snaps = data.snapshots;
  if (snaps.size() < 2)
    throw Error(ErrorCode::configuration, "tabulated family needs at least 2 snapshots");
  std::sort(snaps.begin(), snaps.end(),
            [](const Snapshot& a, const Snapshot& b) { return a.p < b.p; });
  const Index r = snaps.front().model.dimension();
  const auto mu = snaps.front().model.delays.size();
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const auto& m = snaps[k].model;
    require_valid(m, "snapshot at p = " + std::to_string(snaps[k].p));
    if (m.dimension() != r)
      throw Error(ErrorCode::dimension, "snapshot dimensions differ across the table");
    if (m.delays.size() != mu)
      throw Error(ErrorCode::configuration, "snapshot delay counts differ across the table");
    for (std::size_t j = 0; j < mu; ++j)
      if (m.delays[j].tau != snaps.front().model.delays[j].tau)
        throw Error(ErrorCode::configuration, "tabulated snapshots must share delay values");
    if (k > 0 && !(snaps[k].p > snaps[k - 1].p))
      throw Error(ErrorCode::configuration, "snapshot parameters must be strictly increasing");
  }
  if (range.lo < snaps.front().p || range.hi > snaps.back().p)
    throw Error(ErrorCode::configuration, "parameter range exceeds the tabulated snapshots");
  ModelFamily family(std::move(data), range, fd_step);
  family.dimension_ = r;
  family.delay_count_ = static_cast<Index>(mu);
  return family;
}

ModelFamily ModelFamily::delay_parameter(DelayedLinearModel model, Index delay_index,
                                         ParameterRange range) {
  if (delay_index < 0 || delay_index >= model.delay_count())
    throw Error(ErrorCode::configuration, "delay index outside the delay list");
  if (!(range.lo > 0.0))
    throw Error(ErrorCode::configuration, "delay-parameter range must be positive");
  model.delays[static_cast<std::size_t>(delay_index)].tau = range.lo;
  require_valid(model, "delay-parameter family");
  const Index r = model.dimension();
  const Index mu = model.delay_count();
  ModelFamily family(DelayParameterData{std::move(model), delay_index}, range, std::nullopt);
  family.dimension_ = r;
  family.delay_count_ = mu;
  return family;
}

ModelFamily ModelFamily::constant(const DelayedLinearModel& model, ParameterRange range) {
  AffineData data;
  data.E.constant = model.E;
  data.A0.constant = model.A0;
  for (const auto& term : model.delays) {
    data.taus.push_back(term.tau);
    data.delayed.push_back({term.A, {}});
  }
  data.n_dyn = model.n_dyn;
  return affine(std::move(data), range);
}

FamilyKind ModelFamily::kind() const {
  switch (data_.index()) {
    case 0: return FamilyKind::affine;
    case 1: return FamilyKind::tabulated;
    default: return FamilyKind::delay_parameter;
  }
}

std::optional<Index> ModelFamily::varying_delay() const {
  if (const auto* d = std::get_if<DelayParameterData>(&data_)) return d->delay_index;
  return std::nullopt;
}

double ModelFamily::fd_step(double p) const {
  return fd_step_ ? *fd_step_ : 1e-6 * std::max(1.0, std::abs(p));
}

void ModelFamily::check_range(double p, double slack) const {
  if (!std::isfinite(p) || !range_.contains(p, slack)) {
    std::ostringstream msg;
    msg << "p = " << p << " outside [" << range_.lo << ", " << range_.hi << "]";
    throw Error(ErrorCode::range, msg.str());
  }
}

DelayedLinearModel ModelFamily::interpolate(double p) const {
  const auto& snaps = std::get<TabulatedData>(data_).snapshots;
  auto upper = std::upper_bound(snaps.begin(), snaps.end(), p,
                                [](double value, const Snapshot& s) { return value < s.p; });
  std::size_t k = upper == snaps.begin() ? 0 : static_cast<std::size_t>(upper - snaps.begin()) - 1;
  k = std::min(k, snaps.size() - 2);
  const auto& a = snaps[k];
  const auto& b = snaps[k + 1];
  const double t = (p - a.p) / (b.p - a.p);

  DelayedLinearModel out;
  out.n_dyn = a.model.n_dyn;
  out.E = lerp(a.model.E, b.model.E, t);
  out.A0 = lerp(a.model.A0, b.model.A0, t);
  for (std::size_t j = 0; j < a.model.delays.size(); ++j)
    out.delays.push_back({a.model.delays[j].tau, lerp(a.model.delays[j].A, b.model.delays[j].A, t)});
  return out;
}

DelayedLinearModel ModelFamily::evaluate(double p) const {
  check_range(p, fd_step(p));
  if (const auto* affine = std::get_if<AffineData>(&data_)) {
    DelayedLinearModel out;
    out.n_dyn = affine->n_dyn;
    out.E = slot_value(affine->E, p);
    out.A0 = slot_value(affine->A0, p);
    for (std::size_t j = 0; j < affine->taus.size(); ++j)
      out.delays.push_back({affine->taus[j], slot_value(affine->delayed[j], p)});
    return out;
  }
  if (std::holds_alternative<TabulatedData>(data_)) return interpolate(p);

  const auto& d = std::get<DelayParameterData>(data_);
  if (!(p > 0.0)) throw Error(ErrorCode::range, "delay parameter must stay positive");
  DelayedLinearModel out = d.model;
  out.delays[static_cast<std::size_t>(d.delay_index)].tau = p;
  return out;
}

ModelDerivatives ModelFamily::derivatives(double p) const {
  const Index r = dimension_;
  check_range(p, 0.0);
  ModelDerivatives out;
  if (const auto* affine = std::get_if<AffineData>(&data_)) {
    out.dE = slot_slope(affine->E, r);
    out.dA0 = slot_slope(affine->A0, r);
    for (const auto& slot : affine->delayed) out.dA.push_back(slot_slope(slot, r));
    return out;
  }
  if (std::holds_alternative<DelayParameterData>(data_)) {
    out.dE = zero_like(r);
    out.dA0 = zero_like(r);
    out.dA.assign(static_cast<std::size_t>(delay_count_), zero_like(r));
    return out;
  }

  const double h = fd_step(p);
  double lo = p, hi = p + h;
  if (hi > range_.hi) {
    lo = p - h;
    hi = p;
    if (lo < range_.lo) {
      std::ostringstream msg;
      msg << "fd_step " << h << " leaves the tabulated range around p = " << p;
      throw Error(ErrorCode::range, msg.str());
    }
  }
  const auto a = interpolate(lo);
  const auto b = interpolate(hi);
  const double inv = 1.0 / (hi - lo);
  out.dE = (b.E - a.E) * inv;
  out.dA0 = (b.A0 - a.A0) * inv;
  for (std::size_t j = 0; j < a.delays.size(); ++j)
    out.dA.push_back((b.delays[j].A - a.delays[j].A) * inv);
  return out;
}

}  // namespace delaytrack
