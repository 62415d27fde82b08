#include "delaytrack/track.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delaytrack/error.hpp"

namespace delaytrack {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::fold:
      return "fold";
    case EventKind::axis_crossing:
      return "axis_crossing";
    case EventKind::reinit:
      return "reinit";
    case EventKind::reinit_failed:
      return "reinit_failed";
    case EventKind::corrector_fail:
      return "corrector_fail";
  }
  return "unknown";
}

TrackState euler_step(const ContinuationSystem& system, const TrackState& state, double dp) {
  TrackState next = state;
  next.unpack(state.packed() + dp * solve_tangent(system));
  next.p = state.p + dp;
  return next;
}

TrackState integrate_step(const AssembleFn& assemble_at, const TrackState& state, double dp,
                          Method method) {
  auto rate = [&](double p, const Vector& y) {
    TrackState stage = state;
    stage.p = p;
    stage.unpack(y);
    return solve_tangent(assemble_at(p, stage));
  };
  const double p = state.p;
  const Vector y = state.packed();
  Vector y_next;
  switch (method) {
    case Method::euler:
      y_next = y + dp * rate(p, y);
      break;
    case Method::heun: {
      const Vector k1 = rate(p, y);
      const Vector k2 = rate(p + dp, y + dp * k1);
      y_next = y + 0.5 * dp * (k1 + k2);
      break;
    }
    case Method::rk4: {
      const Vector k1 = rate(p, y);
      const Vector k2 = rate(p + 0.5 * dp, y + 0.5 * dp * k1);
      const Vector k3 = rate(p + 0.5 * dp, y + 0.5 * dp * k2);
      const Vector k4 = rate(p + dp, y + dp * k3);
      y_next = y + dp / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      break;
    }
  }
  TrackState next = state;
  next.unpack(y_next);
  next.p = p + dp;
  return next;
}

std::optional<TrackEvent> detect_fold(std::span<const TrackState> window, double fold_eps) {
  const std::size_t n = window.size();
  if (n < 2) return std::nullopt;
  const TrackState& prev = window[n - 2];
  const TrackState& next = window[n - 1];
  if (std::abs(prev.s_i) < fold_eps) return std::nullopt;
  const bool flipped = prev.s_i * next.s_i < 0.0;
  const bool collapsed = std::abs(next.s_i) < fold_eps;
  if (!flipped && !collapsed) return std::nullopt;

  // s_i^2 is locally linear in p at a square-root fold.
  double p_fold = prev.p + (next.p - prev.p) * std::abs(prev.s_i) /
                               (std::abs(prev.s_i) + std::abs(next.s_i));
  if (n >= 3) {
    const TrackState& before = window[n - 3];
    const double slope =
        (prev.s_i * prev.s_i - before.s_i * before.s_i) / (prev.p - before.p);
    if (slope * (next.p - prev.p) < 0.0) {
      const double guess = prev.p - prev.s_i * prev.s_i / slope;
      const double lo = std::min(prev.p, next.p), hi = std::max(prev.p, next.p);
      p_fold = std::clamp(guess, lo, hi);
    }
  }
  const double t = (next.p == prev.p) ? 0.0 : (p_fold - prev.p) / (next.p - prev.p);
  TrackEvent event{EventKind::fold, p_fold, Complex(prev.s_r + t * (next.s_r - prev.s_r), 0.0),
                   flipped ? "imaginary part changed sign" : "imaginary part collapsed"};
  return event;
}

TrackState refined_state(const ModelFamily& family, const RegimeSpec& regime, double p, Complex s,
                         std::optional<ComplexVector> phi, const NewtonOptions& newton) {
  const auto cf = characteristic_for(regime, family.evaluate(p));
  ComplexVector start = phi ? *phi : approximate_null_vector(cf, s);
  const auto refined = refine_newton(cf, s, start, newton);
  return TrackState::from(p, refined.s, refined.phi, refined.residual);
}

ReinitResult reinitialize_at(const ModelFamily& family, double p, const TrackState& previous,
                             const TrackOptions& options) {
  const auto cf = characteristic_for(options.regime, family.evaluate(p));
  InitSettings settings = options.init;
  settings.shift = previous.s();
  const Eigensolution candidates = initial_eigenpairs(cf, settings);

  const ComplexVector prev_phi = previous.phi();
  const double prev_norm = prev_phi.norm();
  struct Scored {
    std::size_t index;
    double overlap;
    double distance;
  };
  std::vector<Scored> eligible;
  double best_overlap = 0.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    const double overlap = std::abs(prev_phi.dot(c.phi)) / (prev_norm * c.phi.norm());
    best_overlap = std::max(best_overlap, overlap);
    if (overlap >= options.overlap_threshold)
      eligible.push_back({k, overlap, std::abs(c.s - previous.s())});
  }
  if (eligible.empty()) {
    std::ostringstream msg;
    msg << "no eigenpair at p = " << p << " overlaps the previous one (best " << best_overlap
        << ", threshold " << options.overlap_threshold << ")";
    throw Error(ErrorCode::reinit_failure, msg.str());
  }

  constexpr double tie_tol = 1e-2;
  double top = 0.0;
  for (const auto& e : eligible) top = std::max(top, e.overlap);
  std::vector<Scored> tied;
  for (const auto& e : eligible)
    if (e.overlap >= top - tie_tol) tied.push_back(e);
  // Among equally aligned candidates keep the cluster nearest the previous
  // eigenvalue, then prefer the larger real part.
  double nearest = tied.front().distance;
  for (const auto& e : tied) nearest = std::min(nearest, e.distance);
  std::vector<Scored> cluster;
  for (const auto& e : tied)
    if (e.distance <= 2.0 * nearest + 1e-12) cluster.push_back(e);
  const auto chosen = *std::max_element(cluster.begin(), cluster.end(), [&](const auto& a, const auto& b) {
    return candidates[a.index].s.real() < candidates[b.index].s.real();
  });

  ReinitResult out;
  const auto& pick = candidates[chosen.index];
  out.state = TrackState::from(p, pick.s, pick.phi, pick.residual);
  out.overlap = chosen.overlap;
  out.tie_broken = cluster.size() > 1;
  out.branch = "unique";
  double competitor_gap = -1.0;
  for (const auto& e : eligible) {
    if (e.index == chosen.index) continue;
    const auto& other = candidates[e.index];
    const double gap = std::abs(other.s - pick.s);
    if (competitor_gap < 0.0 || gap < competitor_gap) {
      competitor_gap = gap;
      out.branch = (pick.s.real() >= other.s.real()) ? "right" : "left";
    }
  }
  return out;
}

namespace {

double state_residual(const ModelFamily& family, const RegimeSpec& regime, const TrackState& st) {
  return characteristic_for(regime, family.evaluate(st.p)).residual(st.s(), st.phi());
}

void check_options(const ModelFamily& family, const TrackState& initial, const TrackOptions& o) {
  if (!family.range().contains(initial.p) || !family.range().contains(o.p_fin)) {
    std::ostringstream msg;
    msg << "tracking interval [" << initial.p << ", " << o.p_fin << "] leaves the family range ["
        << family.range().lo << ", " << family.range().hi << "]";
    throw Error(ErrorCode::range, msg.str());
  }
  if (initial.phi_r.size() != family.dimension() || initial.phi_i.size() != family.dimension())
    throw Error(ErrorCode::dimension, "initial eigenvector does not match the model dimension");
  if (o.p_fin == initial.p)
    throw Error(ErrorCode::configuration, "p_fin equals the initial parameter");
  if (o.dp != 0.0 && o.dp * (o.p_fin - initial.p) < 0.0)
    throw Error(ErrorCode::configuration, "dp points away from p_fin");
  if (o.corrector_every < 0) throw Error(ErrorCode::configuration, "corrector_every is negative");
  const auto mu = family.delay_count();
  switch (o.regime.regime) {
    case Regime::single:
      if (mu != 1) throw Error(ErrorCode::configuration, "single-delay regime needs one delay term");
      break;
    case Regime::multi:
      if (family.varying_delay())
        throw Error(ErrorCode::configuration, "delay-varying family needs the delay_param regime");
      break;
    case Regime::delay_param:
      if (family.varying_delay() != o.regime.delay_index)
        throw Error(ErrorCode::configuration,
                    "delay_param regime does not match the family's varying delay");
      break;
    case Regime::wams:
      if (mu != 1) throw Error(ErrorCode::configuration, "WAMS regime needs one delay term");
      if (!o.regime.wams) throw Error(ErrorCode::configuration, "WAMS regime without channel data");
      o.regime.wams->validate();
      break;
  }
}

void normalize(TrackState& st) {
  const double nn = st.phi_r.squaredNorm() - st.phi_i.squaredNorm();
  const double cross = 2.0 * st.phi_r.dot(st.phi_i);
  // phi <- phi / sqrt(phi^T phi)
  const Complex scale = 1.0 / std::sqrt(Complex(nn, cross));
  const ComplexVector phi = st.phi() * scale;
  st.phi_r = phi.real();
  st.phi_i = phi.imag();
}

}  // namespace

Trajectory track_run(const ModelFamily& family, const TrackState& initial,
                     const TrackOptions& options) {
  check_options(family, initial, options);
  Trajectory out;
  out.settings = options;
  const double p_init = initial.p;
  const double span = options.p_fin - p_init;
  const double dp = options.dp != 0.0 ? options.dp : span / 1000.0;
  out.settings.dp = dp;
  const auto steps = static_cast<long>(std::ceil(span / dp - 1e-9));

  const RegimeSpec& regime = options.regime;
  const AssembleFn assemble_at = [&](double p, const TrackState& st) {
    return assemble(regime, family.evaluate(p), family.derivatives(p), st);
  };
  NewtonOptions newton{options.corrector_tol, options.corrector_max_iter, options.singular_rcond};

  TrackState current = initial;
  current.residual = state_residual(family, regime, current);
  out.samples.push_back(current);

  // Replaces a sample at p_at (if any) by a reinitialized state; false stops tracking.
  auto reinit_at = [&](double p_at, const TrackState& reference) {
    try {
      const auto result = reinitialize_at(family, p_at, reference, options);
      std::ostringstream detail;
      detail << "branch " << result.branch << ", overlap " << result.overlap;
      out.events.push_back({EventKind::reinit, p_at, result.state.s(), detail.str()});
      if (out.samples.back().p == p_at) out.samples.pop_back();
      out.samples.push_back(result.state);
      return true;
    } catch (const Error& e) {
      out.events.push_back({EventKind::reinit_failed, p_at, reference.s(), e.what()});
      out.truncated = true;
      out.message = e.what();
      return false;
    }
  };
  auto stop_at_fold = [&](const TrackEvent& fold) {
    out.truncated = true;
    out.message = "stopped at a fold near p = " + std::to_string(fold.p);
  };

  // Pre-fold state whose eigenvector guides reinitialization at the next grid point.
  std::optional<TrackState> pending;

  for (long k = 1; k <= steps; ++k) {
    const double p_next = (k == steps) ? options.p_fin : p_init + static_cast<double>(k) * dp;
    if (pending) {
      if (!reinit_at(p_next, *pending)) break;
      pending.reset();
      current = out.samples.back();
      continue;
    }
    TrackState next;
    try {
      next = integrate_step(assemble_at, current, p_next - current.p, options.method);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::defective) {
        const TrackEvent fold{EventKind::fold, current.p, Complex(current.s_r, 0.0), e.what()};
        out.events.push_back(fold);
        if (!options.reinit) {
          stop_at_fold(fold);
          break;
        }
        if (!reinit_at(p_next, current)) break;
        current = out.samples.back();
        continue;
      }
      out.aborted = true;
      out.message = e.what();
      break;
    }
    if (!next.packed().allFinite()) {
      out.aborted = true;
      out.message = "non-finite state at p = " + std::to_string(p_next);
      break;
    }
    if (options.renormalize) normalize(next);

    const bool due = options.corrector_every > 0 &&
                     (k % options.corrector_every == 0 || k == steps);
    if (due) {
      try {
        const auto cf = characteristic_for(regime, family.evaluate(next.p));
        const auto refined = refine_newton(cf, next.s(), next.phi(), newton);
        next = TrackState::from(next.p, refined.s, refined.phi, refined.residual);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::non_convergence || e.code() == ErrorCode::defective) {
          out.events.push_back({EventKind::corrector_fail, next.p, next.s(), e.what()});
        } else {
          out.aborted = true;
          out.message = e.what();
          break;
        }
      }
    }
    try {
      next.residual = state_residual(family, regime, next);
    } catch (const Error& e) {
      out.aborted = true;
      out.message = e.what();
      break;
    }

    out.samples.push_back(next);
    const std::size_t n = out.samples.size();
    const std::size_t w = std::min<std::size_t>(n, 3);
    const auto fold = detect_fold(std::span<const TrackState>(out.samples).subspan(n - w, w),
                                  options.fold_eps);
    if (fold) {
      out.events.push_back(*fold);
      if (!options.reinit) {
        stop_at_fold(*fold);
        break;
      }
      if (k == steps) {
        if (!reinit_at(next.p, current)) break;
      } else {
        pending = current;
      }
      current = out.samples.back();
      continue;
    }
    if (current.s_r * next.s_r < 0.0 || (next.s_r == 0.0 && current.s_r != 0.0)) {
      const double t = current.s_r / (current.s_r - next.s_r);
      out.events.push_back({EventKind::axis_crossing, current.p + t * (next.p - current.p),
                            current.s() + t * (next.s() - current.s()),
                            current.s_r < 0.0 ? "destabilizing" : "stabilizing"});
    }
    current = next;
  }
  return out;
}

std::vector<Crossing> find_crossings(const ModelFamily& family, const Trajectory& trajectory,
                                     const TrackOptions& options) {
  std::vector<Crossing> out;
  const auto& samples = trajectory.samples;
  const RegimeSpec& regime = options.regime;
  const NewtonOptions tight{std::min(options.corrector_tol, 1e-12), 50, options.singular_rcond};
  const NewtonOptions loose{options.corrector_tol, 50, options.singular_rcond};

  auto solve_at = [&](double p, const TrackState& seed) {
    try {
      return refined_state(family, regime, p, seed.s(), seed.phi(), tight);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_convergence) throw;
      return refined_state(family, regime, p, seed.s(), seed.phi(), loose);
    }
  };

  for (std::size_t k = 1; k < samples.size(); ++k) {
    const TrackState& a = samples[k - 1];
    const TrackState& b = samples[k];
    if (a.s_r == 0.0) {
      out.push_back({a.p, a.s()});
      continue;
    }
    if (a.s_r * b.s_r > 0.0) continue;
    if (b.s_r == 0.0) continue;  // reported as the left end of the next pair
    // A reinitialized sample may sit on another branch; skip jumps.
    if (std::abs(a.s() - b.s()) > 0.5 * (std::abs(a.s()) + std::abs(b.s())) + 1.0) continue;

    TrackState lo = a, hi = b;
    TrackState best = std::abs(a.s_r) < std::abs(b.s_r) ? a : b;
    try {
      for (int it = 0; it < 200; ++it) {
        if (std::abs(best.s_r) < 1e-9 || std::abs(hi.p - lo.p) < 1e-9) break;
        const double mid = 0.5 * (lo.p + hi.p);
        const TrackState& seed = std::abs(lo.s_r) <= std::abs(hi.s_r) ? lo : hi;
        TrackState m = solve_at(mid, seed);
        if (std::abs(m.s_r) < std::abs(best.s_r)) best = m;
        if ((m.s_r < 0.0) == (lo.s_r < 0.0))
          lo = m;
        else
          hi = m;
      }
    } catch (const Error&) {
      // keep the best bracket end found so far
    }
    out.push_back({best.p, best.s()});
  }
  return out;
}

}  // namespace delaytrack
