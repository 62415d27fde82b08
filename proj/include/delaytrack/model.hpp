#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "delaytrack/types.hpp"

namespace delaytrack {

struct DelayTerm {
  double tau = 0.0;
  SparseMatrix A;
};

/// Linearized DDAE  E x' = A0 x + sum_j A_j x(t - tau_j)  at one parameter value.
///
/// The first n_dyn coordinates are dynamic states, the remainder algebraic
/// variables; when n_dyn is set the algebraic columns of E must be empty.
struct DelayedLinearModel {
  SparseMatrix E;
  SparseMatrix A0;
  std::vector<DelayTerm> delays;
  std::optional<Index> n_dyn;

  Index dimension() const { return E.rows(); }
  Index delay_count() const { return static_cast<Index>(delays.size()); }
  double max_delay() const;
};

/// Parameter derivatives of E, A0 and each delayed matrix.
struct ModelDerivatives {
  SparseMatrix dE;
  SparseMatrix dA0;
  std::vector<SparseMatrix> dA;
};

enum class ModelViolation { dimension, nonpositive_delay, mass_structure };

struct ModelDiagnostic {
  ModelViolation kind;
  std::string message;
};

/// Empty result means the model satisfies every structural invariant.
std::vector<ModelDiagnostic> validate_model(const DelayedLinearModel& model);

struct ParameterRange {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double p, double slack = 0.0) const { return p >= lo - slack && p <= hi + slack; }
};

/// One affine matrix slot  M(p) = constant + p * slope.  An empty slope means zero.
struct AffineSlot {
  SparseMatrix constant;
  SparseMatrix slope;
};

struct AffineData {
  AffineSlot E;
  AffineSlot A0;
  std::vector<double> taus;
  std::vector<AffineSlot> delayed;
  std::optional<Index> n_dyn;
};

struct Snapshot {
  double p = 0.0;
  DelayedLinearModel model;
};

struct TabulatedData {
  std::vector<Snapshot> snapshots;  // sorted by p
};

struct DelayParameterData {
  DelayedLinearModel model;
  Index delay_index = 0;  // 0-based; tau of this term equals p
};

enum class FamilyKind { affine, tabulated, delay_parameter };

/// A parameterized family p -> DelayedLinearModel. Immutable after construction.
class ModelFamily {
 public:
  static ModelFamily affine(AffineData data, ParameterRange range,
                            std::optional<double> fd_step = std::nullopt);
  static ModelFamily tabulated(TabulatedData data, ParameterRange range,
                               std::optional<double> fd_step = std::nullopt);
  static ModelFamily delay_parameter(DelayedLinearModel model, Index delay_index,
                                     ParameterRange range);

  /// A family whose matrices do not move with p (affine kind with zero slopes).
  static ModelFamily constant(const DelayedLinearModel& model, ParameterRange range);

  FamilyKind kind() const;
  const ParameterRange& range() const { return range_; }
  Index dimension() const { return dimension_; }
  Index delay_count() const { return delay_count_; }

  /// Index of the delay term driven by p (delay-parameter kind only).
  std::optional<Index> varying_delay() const;

  /// Finite-difference step at p: the configured value, or 1e-6 * max(1, |p|).
  double fd_step(double p) const;

  DelayedLinearModel evaluate(double p) const;
  ModelDerivatives derivatives(double p) const;

 private:
  using Data = std::variant<AffineData, TabulatedData, DelayParameterData>;

  ModelFamily(Data data, ParameterRange range, std::optional<double> fd_step);

  DelayedLinearModel interpolate(double p) const;
  void check_range(double p, double slack) const;

  Data data_;
  ParameterRange range_;
  std::optional<double> fd_step_;
  Index dimension_ = 0;
  Index delay_count_ = 0;
};

}  // namespace delaytrack
