#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaytrack/charfun.hpp"
#include "delaytrack/init.hpp"
#include "delaytrack/model.hpp"
#include "delaytrack/types.hpp"

namespace delaytrack {

/// One point of an eigenpair trajectory: y = (phi_r, phi_i, s_r, s_i) at p.
struct TrackState {
  double p = 0.0;
  Vector phi_r;
  Vector phi_i;
  double s_r = 0.0;
  double s_i = 0.0;
  double residual = 0.0;

  static TrackState from(double p, Complex s, const ComplexVector& phi, double residual = 0.0);

  Complex s() const { return {s_r, s_i}; }
  ComplexVector phi() const;
  Index dimension() const { return phi_r.size(); }

  /// Stacked y vector of length 2r + 2.
  Vector packed() const;
  void unpack(const Vector& y);
};

/// M(y) y' = h(y) with M = [[M1, M2], [M3, 0]], M1 2r x 2r, M2 2r x 2, M3 2 x 2r.
struct ContinuationSystem {
  SparseMatrix M;
  Vector h;
};

enum class Regime { single, multi, delay_param, wams };
enum class Method { euler, heun, rk4 };

struct RegimeSpec {
  Regime regime = Regime::multi;
  Index delay_index = 0;  // delay_param: the term whose magnitude is p (0-based)
  std::optional<WamsSpec> wams;
};

ContinuationSystem assemble_single(const DelayedLinearModel& model,
                                   const ModelDerivatives& derivatives, const TrackState& state);
ContinuationSystem assemble_multi(const DelayedLinearModel& model,
                                  const ModelDerivatives& derivatives, const TrackState& state);
/// Delayed matrices are taken as independent of p; only dE and dA0 enter h.
ContinuationSystem assemble_delay_param(const DelayedLinearModel& model,
                                        const ModelDerivatives& derivatives,
                                        const TrackState& state, Index delay_index);
ContinuationSystem assemble_wams(const DelayedLinearModel& model,
                                 const ModelDerivatives& derivatives, const TrackState& state,
                                 const WamsSpec& wams);

ContinuationSystem assemble(const RegimeSpec& regime, const DelayedLinearModel& model,
                            const ModelDerivatives& derivatives, const TrackState& state);

/// The eigenproblem a regime refines against (WAMS uses the transfer-function form).
CharacteristicFunction characteristic_for(const RegimeSpec& regime,
                                          const DelayedLinearModel& model);

/// y' = M^-1 h by sparse LU. Throws defective when M is singular to working precision.
Vector solve_tangent(const ContinuationSystem& system, double singular_rcond = 1e-13);

using AssembleFn = std::function<ContinuationSystem(double p, const TrackState& state)>;

/// Forward Euler from an already assembled system.
TrackState euler_step(const ContinuationSystem& system, const TrackState& state, double dp);

/// One step of the chosen scheme; internal stages re-assemble through `assemble_at`.
TrackState integrate_step(const AssembleFn& assemble_at, const TrackState& state, double dp,
                          Method method);

enum class EventKind { fold, axis_crossing, reinit, reinit_failed, corrector_fail };

std::string_view to_string(EventKind kind);

struct TrackEvent {
  EventKind kind;
  double p = 0.0;
  Complex s;
  std::string detail;
};

struct TrackOptions {
  double p_fin = 1.0;
  double dp = 0.0;  // 0 selects (p_fin - p_init) / 1000
  Method method = Method::euler;
  int corrector_every = 10;  // 0 disables the corrector
  double corrector_tol = 1e-10;
  int corrector_max_iter = 20;
  double fold_eps = 1e-4;
  double norm_tol = 1e-8;
  bool renormalize = true;  // project phi back onto phi^T phi = 1 after each step
  bool reinit = false;      // reinitialize after a fold instead of truncating
  double overlap_threshold = 0.5;
  double singular_rcond = 1e-13;
  RegimeSpec regime;
  InitSettings init;  // discretization used by reinitialization
};

struct Trajectory {
  std::vector<TrackState> samples;
  std::vector<TrackEvent> events;
  TrackOptions settings;
  bool truncated = false;  // stopped at a fold
  bool aborted = false;    // stopped by a range or numerical failure
  std::string message;
};

Trajectory track_run(const ModelFamily& family, const TrackState& initial,
                     const TrackOptions& options);

/// Fold test on the most recent samples (at least two).
std::optional<TrackEvent> detect_fold(std::span<const TrackState> window, double fold_eps);

struct ReinitResult {
  TrackState state;
  double overlap = 0.0;
  bool tie_broken = false;
  std::string branch;  // "unique", "right" or "left" relative to the nearest competitor
};

ReinitResult reinitialize_at(const ModelFamily& family, double p, const TrackState& previous,
                             const TrackOptions& options);

struct Crossing {
  double p = 0.0;
  Complex s;
};

/// Imaginary-axis crossings between consecutive samples, located by bisection
/// with Newton re-solves.
std::vector<Crossing> find_crossings(const ModelFamily& family, const Trajectory& trajectory,
                                     const TrackOptions& options);

/// Refined initial state at p from an eigenvalue guess (and optional eigenvector).
TrackState refined_state(const ModelFamily& family, const RegimeSpec& regime, double p, Complex s,
                         std::optional<ComplexVector> phi, const NewtonOptions& newton);

}  // namespace delaytrack
