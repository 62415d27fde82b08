#pragma once

#include <cstdint>
#include <vector>

#include "delaytrack/init.hpp"
#include "delaytrack/model.hpp"
#include "delaytrack/track.hpp"

namespace delaytrack {

/// Refined eigenpairs of the family at p near `shift`.
Eigensolution spectrum_at(const ModelFamily& family, double p, int degree, Complex shift,
                          int count, const RegimeSpec& regime = {});

struct HayesRoots {
  std::vector<Complex> roots;  // descending Re; each upper-half root followed by its conjugate
  bool shortfall = false;      // fewer than the requested count converged
};

/// Roots of s - a - b exp(-s tau) by Newton from a grid over
/// Re in [-10, 2], Im in [0, 20] with spacing 0.25.
HayesRoots hayes_roots(double a, double b, double tau, int count);

struct Checkpoint {
  double p = 0.0;
  Complex s_tracked;
  Complex s_oracle;
  double distance = 0.0;
  bool matched = false;
};

struct ComparisonReport {
  std::vector<Checkpoint> checkpoints;
  double max_distance = 0.0;
  double matched_fraction = 0.0;
};

struct CompareOptions {
  double pass_tol = 1e-6;
  int degree = 16;
  int count = 6;
  RegimeSpec regime;
  NewtonOptions newton;
};

ComparisonReport compare_trajectory(const Trajectory& trajectory, const ModelFamily& family,
                                    int checkpoint_count, const CompareOptions& options = {});

/// Reproducible random sparse DDAE: E = diag(I_{n_dyn}, 0), diagonally dominant
/// A0 with a negative diagonal, delays drawn from [0.01, 0.1].
DelayedLinearModel rand_ddae(Index r, Index n_dyn, double density, int mu, std::uint64_t seed);

}  // namespace delaytrack
