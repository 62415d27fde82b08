#include "delaytrack/cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "delaytrack/cli/manifest.hpp"
#include "delaytrack/cli/svg_plot.hpp"
#include "delaytrack/cli/trajectory_csv.hpp"
#include "delaytrack/error.hpp"
#include "delaytrack/matrix_market.hpp"
#include "delaytrack/oracle.hpp"

namespace delaytrack::cli {

namespace fs = std::filesystem;

Complex parse_complex_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw Error(ErrorCode::configuration, "expected RE,IM but got '" + text + "'");
  try {
    std::size_t used_re = 0, used_im = 0;
    const std::string re = text.substr(0, comma), im = text.substr(comma + 1);
    const double a = std::stod(re, &used_re);
    const double b = std::stod(im, &used_im);
    if (used_re != re.size() || used_im != im.size()) throw std::invalid_argument("trailing");
    return {a, b};
  } catch (const std::exception&) {
    throw Error(ErrorCode::configuration, "expected RE,IM but got '" + text + "'");
  }
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::range:
      case ErrorCode::configuration:
      case ErrorCode::dimension:
      case ErrorCode::missing_file:
      case ErrorCode::malformed_matrix:
      case ErrorCode::unknown_regime:
      case ErrorCode::parse:
        return kConfigError;
      default:
        return kNumericalFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

namespace {

Manifest load_with_flags(const fs::path& path, const CommandFlags& flags) {
  Manifest m = load_manifest(path);
  if (flags.delay_index) select_varying_delay(m, static_cast<Index>(*flags.delay_index) - 1);
  auto& t = m.tracking;
  if (flags.dp) t.dp = *flags.dp;
  if (flags.method) t.method = parse_method(*flags.method);
  if (flags.corrector_every) t.corrector_every = *flags.corrector_every;
  if (flags.tol) t.corrector_tol = *flags.tol;
  if (flags.p_init) m.p_init = *flags.p_init;
  if (flags.p_fin) t.p_fin = *flags.p_fin;
  if (flags.reinit) t.reinit = true;
  if (flags.count) t.init.count = *flags.count;
  t.init.newton.tol = t.corrector_tol;
  return m;
}

/// Writes to --out when given, otherwise to `fallback`.
class Sink {
 public:
  Sink(const std::optional<fs::path>& path, std::ostream& fallback) : out_(&fallback) {
    if (path) {
      file_.open(*path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::missing_file, "cannot write " + path->string());
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

TrackState initial_state(const Manifest& m, const CommandFlags& flags) {
  const auto& t = m.tracking;
  if (flags.init_from)
    return refined_state(m.family, t.regime, m.p_init, *flags.init_from, std::nullopt, t.init.newton);
  const auto cf = characteristic_for(t.regime, m.family.evaluate(m.p_init));
  const auto pairs = initial_eigenpairs(cf, t.init);
  if (pairs.empty())
    throw Error(ErrorCode::non_convergence, "no refined eigenpair near the initialization shift");
  // Rightmost, preferring the upper member of a conjugate pair.
  std::size_t pick = 0;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    if (std::abs(pairs[k].s.real() - pairs[0].s.real()) > 1e-10) break;
    if (pairs[k].s.imag() > pairs[pick].s.imag()) pick = k;
  }
  return TrackState::from(m.p_init, pairs[pick].s, pairs[pick].phi, pairs[pick].residual);
}

int trajectory_exit(const Trajectory& tr, std::ostream& err) {
  if (tr.aborted) {
    err << "tracking aborted: " << tr.message << '\n';
    return kNumericalFailure;
  }
  if (tr.truncated) {
    err << "tracking truncated: " << tr.message << '\n';
    return kTruncated;
  }
  return kOk;
}

}  // namespace

int cmd_spectrum(const fs::path& manifest, const CommandFlags& flags, std::ostream& out,
                 std::ostream& err) {
  return guarded([&] {
    const Manifest m = load_with_flags(manifest, flags);
    const double p = flags.p.value_or(m.p_init);
    const auto cf = characteristic_for(m.tracking.regime, m.family.evaluate(p));
    const auto pairs = initial_eigenpairs(cf, m.tracking.init);
    Sink sink(flags.out, out);
    sink.stream() << "s_r,s_i,residual\r\n";
    for (const auto& e : pairs)
      sink.stream() << format_double(e.s.real()) << ',' << format_double(e.s.imag()) << ','
                    << format_double(e.residual) << "\r\n";
    return pairs.empty() ? kNoResult : kOk;
  }, err);
}

int cmd_track(const fs::path& manifest, const CommandFlags& flags, std::ostream& out,
              std::ostream& err) {
  return guarded([&] {
    const Manifest m = load_with_flags(manifest, flags);
    const auto tr = track_run(m.family, initial_state(m, flags), m.tracking);
    {
      Sink sink(flags.out, out);
      write_trajectory_csv(sink.stream(), tr);
    }
    if (flags.svg) write_trajectory_plots(*flags.svg, tr, find_crossings(m.family, tr, m.tracking));
    return trajectory_exit(tr, err);
  }, err);
}

int cmd_margin(const fs::path& manifest, const CommandFlags& flags, std::ostream& out,
               std::ostream& err) {
  return guarded([&] {
    const Manifest m = load_with_flags(manifest, flags);
    const auto tr = track_run(m.family, initial_state(m, flags), m.tracking);
    const auto crossings = find_crossings(m.family, tr, m.tracking);
    Sink sink(flags.out, out);
    for (const auto& c : crossings)
      sink.stream() << format_double(c.p) << ',' << format_double(c.s.imag()) << "\r\n";
    if (flags.svg) write_trajectory_plots(*flags.svg, tr, crossings);
    if (tr.aborted) err << "tracking aborted: " << tr.message << '\n';
    return crossings.empty() ? kNoResult : kOk;
  }, err);
}

int cmd_validate(const fs::path& manifest, const CommandFlags& flags, std::ostream& out,
                 std::ostream& err) {
  return guarded([&] {
    const Manifest m = load_with_flags(manifest, flags);
    const auto tr = track_run(m.family, initial_state(m, flags), m.tracking);
    CompareOptions options;
    options.pass_tol = flags.pass_tol;
    options.degree = m.tracking.init.degree;
    options.count = m.tracking.init.count;
    options.regime = m.tracking.regime;
    options.newton = m.tracking.init.newton;
    const auto report = compare_trajectory(tr, m.family, flags.checkpoints, options);
    Sink sink(flags.out, out);
    auto& o = sink.stream();
    o << "p,s_tracked_r,s_tracked_i,s_oracle_r,s_oracle_i,distance,matched\r\n";
    for (const auto& c : report.checkpoints)
      o << format_double(c.p) << ',' << format_double(c.s_tracked.real()) << ','
        << format_double(c.s_tracked.imag()) << ',' << format_double(c.s_oracle.real()) << ','
        << format_double(c.s_oracle.imag()) << ',' << format_double(c.distance) << ','
        << (c.matched ? 1 : 0) << "\r\n";
    o << "\r\nmax_distance,matched_fraction\r\n"
      << format_double(report.max_distance) << ',' << format_double(report.matched_fraction)
      << "\r\n";
    if (tr.aborted || tr.truncated) err << "tracking stopped early: " << tr.message << '\n';
    return report.matched_fraction == 1.0 ? kOk : kNoResult;
  }, err);
}

int cmd_gen(const CommandFlags& flags, std::ostream& out, std::ostream& err) {
  return guarded([&] {
    if (!flags.out) throw Error(ErrorCode::configuration, "gen needs --out DIR");
    const fs::path dir = *flags.out;
    fs::create_directories(dir);
    const Index n_dyn = flags.n_dyn.value_or(flags.r);
    const auto model = rand_ddae(flags.r, n_dyn, flags.density, flags.mu, flags.seed);

    write_matrix_market(dir / "E.mtx", model.E);
    write_matrix_market(dir / "A0.mtx", model.A0);
    YAML::Emitter y;
    y.SetDoublePrecision(17);
    y << YAML::BeginMap;
    y << YAML::Key << "format_version" << YAML::Value << kManifestVersion;
    y << YAML::Key << "dimensions" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "r"
      << YAML::Value << model.dimension() << YAML::Key << "n_dyn" << YAML::Value << n_dyn
      << YAML::EndMap;
    y << YAML::Key << "family" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "kind" << YAML::Value << "constant";
    y << YAML::Key << "range" << YAML::Value << YAML::Flow << YAML::BeginSeq << 0.0 << 1.0 << YAML::EndSeq;
    y << YAML::Key << "E" << YAML::Value << "E.mtx";
    y << YAML::Key << "A0" << YAML::Value << "A0.mtx";
    y << YAML::Key << "delays" << YAML::Value << YAML::BeginSeq;
    for (std::size_t j = 0; j < model.delays.size(); ++j) {
      const std::string name = "A" + std::to_string(j + 1) + ".mtx";
      write_matrix_market(dir / name, model.delays[j].A);
      y << YAML::Flow << YAML::BeginMap << YAML::Key << "tau" << YAML::Value << model.delays[j].tau
        << YAML::Key << "A" << YAML::Value << name << YAML::EndMap;
    }
    y << YAML::EndSeq << YAML::EndMap;
    y << YAML::Key << "regime" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
      << "multi" << YAML::EndMap;
    y << YAML::Key << "seed" << YAML::Value << flags.seed;
    y << YAML::EndMap;
    std::ofstream f(dir / "manifest.yaml");
    if (!f) throw Error(ErrorCode::missing_file, "cannot write " + (dir / "manifest.yaml").string());
    f << y.c_str() << '\n';
    out << (dir / "manifest.yaml").string() << '\n';
    return kOk;
  }, err);
}

}  // namespace delaytrack::cli
