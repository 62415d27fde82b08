#include "delaytrack/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "delaytrack/error.hpp"

namespace delaytrack {

Eigensolution spectrum_at(const ModelFamily& family, double p, int degree, Complex shift,
                          int count, const RegimeSpec& regime) {
  const auto cf = characteristic_for(regime, family.evaluate(p));
  InitSettings settings;
  settings.degree = degree;
  settings.shift = shift;
  settings.count = count;
  return initial_eigenpairs(cf, settings);
}

HayesRoots hayes_roots(double a, double b, double tau, int count) {
  if (!(tau > 0.0)) throw Error(ErrorCode::configuration, "hayes_roots needs tau > 0");
  auto g = [&](Complex s) { return s - a - b * std::exp(-s * tau); };
  auto dg = [&](Complex s) { return 1.0 + b * tau * std::exp(-s * tau); };

  std::vector<Complex> upper;
  for (int i = 0; i <= 48; ++i) {
    for (int k = 0; k <= 80; ++k) {
      Complex s(-10.0 + 0.25 * i, 0.25 * k);
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const Complex d = dg(s);
        if (std::abs(d) == 0.0) break;
        const Complex step = g(s) / d;
        s -= step;
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()) || std::abs(s) > 1e6) break;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(s))) {
          ok = true;
          break;
        }
      }
      if (!ok && !(std::isfinite(s.real()) && std::abs(g(s)) < 1e-12)) continue;
      if (std::abs(s.imag()) < 1e-12) s = Complex(s.real(), 0.0);
      if (s.imag() < 0.0) s = std::conj(s);
      if (std::abs(g(s)) >= 1e-12) continue;
      const bool seen = std::any_of(upper.begin(), upper.end(),
                                    [&](Complex r) { return std::abs(r - s) < 1e-8; });
      if (!seen) upper.push_back(s);
    }
  }
  std::sort(upper.begin(), upper.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() < y.imag();
  });

  HayesRoots out;
  for (const Complex s : upper) {
    out.roots.push_back(s);
    if (s.imag() != 0.0) out.roots.push_back(std::conj(s));
  }
  if (static_cast<int>(out.roots.size()) < count) out.shortfall = true;
  return out;
}

namespace {

Complex tracked_at(const Trajectory& trajectory, double p) {
  const auto& samples = trajectory.samples;
  std::size_t best = 0;
  for (std::size_t k = 1; k < samples.size(); ++k)
    if (std::abs(samples[k].p - p) < std::abs(samples[best].p - p)) best = k;
  if (std::abs(samples[best].p - p) <= 1e-12 * std::max(1.0, std::abs(p)) || samples.size() == 1)
    return samples[best].s();
  // Linear interpolation between the bracketing samples.
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const auto& a = samples[k - 1];
    const auto& b = samples[k];
    if ((p - a.p) * (p - b.p) <= 0.0) {
      const double t = (p - a.p) / (b.p - a.p);
      return a.s() + t * (b.s() - a.s());
    }
  }
  return samples[best].s();
}

}  // namespace

ComparisonReport compare_trajectory(const Trajectory& trajectory, const ModelFamily& family,
                                    int checkpoint_count, const CompareOptions& options) {
  if (trajectory.samples.empty())
    throw Error(ErrorCode::configuration, "cannot compare an empty trajectory");
  if (checkpoint_count < 1) throw Error(ErrorCode::configuration, "checkpoint count must be positive");
  ComparisonReport report;
  const double p0 = trajectory.samples.front().p;
  const double p1 = trajectory.samples.back().p;
  int matched = 0;
  for (int c = 0; c < checkpoint_count; ++c) {
    Checkpoint cp;
    cp.p = checkpoint_count == 1 ? p0 : p0 + (p1 - p0) * c / (checkpoint_count - 1);
    if (c == checkpoint_count - 1) cp.p = p1;
    cp.s_tracked = tracked_at(trajectory, cp.p);
    cp.distance = std::numeric_limits<double>::infinity();
    try {
      const auto cf = characteristic_for(options.regime, family.evaluate(cp.p));
      InitSettings settings;
      settings.degree = options.degree;
      settings.shift = cp.s_tracked;
      settings.count = options.count;
      settings.newton = options.newton;
      for (const auto& e : initial_eigenpairs(cf, settings)) {
        const double d = std::abs(e.s - cp.s_tracked);
        if (d < cp.distance) {
          cp.distance = d;
          cp.s_oracle = e.s;
        }
      }
    } catch (const Error&) {
      // unmatched checkpoint
    }
    cp.matched = cp.distance < options.pass_tol;
    if (cp.matched) ++matched;
    report.max_distance = std::max(report.max_distance, cp.distance);
    report.checkpoints.push_back(cp);
  }
  report.matched_fraction = static_cast<double>(matched) / checkpoint_count;
  return report;
}

namespace {

SparseMatrix random_sparse(Index r, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Triplet> t;
  if (density >= 0.1) {
    std::bernoulli_distribution keep(density);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < r; ++j)
        if (keep(rng)) t.emplace_back(i, j, value(rng));
  } else {
    const auto nnz = static_cast<std::size_t>(std::llround(density * static_cast<double>(r) * static_cast<double>(r)));
    std::uniform_int_distribution<Index> pos(0, r - 1);
    t.reserve(nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
      const Index i = pos(rng);
      const Index j = pos(rng);
      t.emplace_back(i, j, value(rng));
    }
  }
  SparseMatrix m(r, r);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Vector row_abs_sums(const SparseMatrix& m) {
  Vector out = Vector::Zero(m.rows());
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out[it.row()] += std::abs(it.value());
  return out;
}

}  // namespace

DelayedLinearModel rand_ddae(Index r, Index n_dyn, double density, int mu, std::uint64_t seed) {
  if (r < 1 || n_dyn < 0 || n_dyn > r)
    throw Error(ErrorCode::configuration, "rand_ddae needs r >= 1 and 0 <= n_dyn <= r");
  if (!(density > 0.0 && density <= 1.0))
    throw Error(ErrorCode::configuration, "rand_ddae needs 0 < density <= 1");
  if (mu < 0) throw Error(ErrorCode::configuration, "rand_ddae needs mu >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> delay(0.01, 0.1);

  DelayedLinearModel model;
  std::vector<Triplet> e;
  for (Index i = 0; i < n_dyn; ++i) e.emplace_back(i, i, 1.0);
  model.E.resize(r, r);
  model.E.setFromTriplets(e.begin(), e.end());
  model.n_dyn = n_dyn;

  SparseMatrix A0 = random_sparse(r, density, rng);
  Vector dominance = row_abs_sums(A0);
  for (int j = 0; j < mu; ++j) {
    DelayTerm term;
    term.tau = delay(rng);
    term.A = random_sparse(r, density, rng);
    dominance += row_abs_sums(term.A);
    model.delays.push_back(std::move(term));
  }
  SparseMatrix shift(r, r);
  std::vector<Triplet> d;
  for (Index i = 0; i < r; ++i) d.emplace_back(i, i, -(dominance[i] + 1.0));
  shift.setFromTriplets(d.begin(), d.end());
  // Replace the diagonal of A0 so each row is strictly dominated by a negative pivot.
  SparseMatrix off = A0;
  off.prune([](Index i, Index j, double) { return i != j; });
  model.A0 = off + shift;
  return model;
}

}  // namespace delaytrack
