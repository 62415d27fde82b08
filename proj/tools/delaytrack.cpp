#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "delaytrack/cli/commands.hpp"

namespace dc = delaytrack::cli;

namespace {

struct RawFlags {
  std::optional<double> dp;
  std::optional<std::string> method;
  std::optional<int> corrector_every;
  std::optional<double> tol;
  std::optional<double> p_init;
  std::optional<double> p_fin;
  std::optional<int> delay_index;
  std::optional<std::string> init_from;
  std::optional<std::string> out;
  std::optional<std::string> svg;
  std::optional<double> p;
  std::optional<int> count;
  std::optional<long long> n_dyn;
  int checkpoints = 11;
  double pass_tol = 1e-6;
  std::uint64_t seed = 1;
  bool reinit = false;
  long long r = 10;
  double density = 0.1;
  int mu = 1;
  std::string manifest;
};

void tracking_flags(CLI::App* cmd, RawFlags& f) {
  cmd->add_option("manifest", f.manifest, "Model manifest (YAML)")->required();
  cmd->add_option("--dp", f.dp, "Parameter step");
  cmd->add_option("--method", f.method, "Integrator")->check(CLI::IsMember({"euler", "heun", "rk4"}));
  cmd->add_option("--corrector-every", f.corrector_every, "Newton corrector period in steps (0 = off)");
  cmd->add_option("--tol", f.tol, "Corrector tolerance");
  cmd->add_option("--p-init", f.p_init, "Initial parameter");
  cmd->add_option("--p-fin", f.p_fin, "Final parameter");
  cmd->add_option("--delay-index", f.delay_index, "Varying delay term (1-based)");
  cmd->add_option("--init-from", f.init_from, "Initial eigenvalue guess RE,IM");
  cmd->add_option("--out", f.out, "Output file (default stdout)");
  cmd->add_option("--svg", f.svg, "Write PREFIX-locus.svg and PREFIX-damping.svg");
  cmd->add_option("--count", f.count, "Eigenvalues requested from the initializer");
  cmd->add_flag("--reinit", f.reinit, "Reinitialize after folds instead of stopping");
}

dc::CommandFlags convert(const RawFlags& raw) {
  dc::CommandFlags f;
  f.dp = raw.dp;
  f.method = raw.method;
  f.corrector_every = raw.corrector_every;
  f.tol = raw.tol;
  f.p_init = raw.p_init;
  f.p_fin = raw.p_fin;
  f.delay_index = raw.delay_index;
  if (raw.init_from) f.init_from = dc::parse_complex_pair(*raw.init_from);
  if (raw.out) f.out = *raw.out;
  f.svg = raw.svg;
  f.checkpoints = raw.checkpoints;
  f.pass_tol = raw.pass_tol;
  f.seed = raw.seed;
  f.reinit = raw.reinit;
  f.p = raw.p;
  f.count = raw.count;
  f.r = raw.r;
  if (raw.n_dyn) f.n_dyn = *raw.n_dyn;
  f.density = raw.density;
  f.mu = raw.mu;
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue tracking for parameterized delay differential-algebraic systems"};
  app.require_subcommand(1);
  RawFlags raw;

  auto* spectrum = app.add_subcommand("spectrum", "Refined eigenvalues near the init shift at one p");
  spectrum->add_option("manifest", raw.manifest, "Model manifest (YAML)")->required();
  spectrum->add_option("--p", raw.p, "Parameter value (default p_init)");
  spectrum->add_option("--p-init", raw.p_init, "Alias of --p");
  spectrum->add_option("--delay-index", raw.delay_index, "Varying delay term (1-based)");
  spectrum->add_option("--count", raw.count, "Number of eigenvalues");
  spectrum->add_option("--tol", raw.tol, "Newton tolerance");
  spectrum->add_option("--out", raw.out, "Output file (default stdout)");

  auto* track = app.add_subcommand("track", "Track one eigenpair over p");
  tracking_flags(track, raw);
  auto* margin = app.add_subcommand("margin", "Imaginary-axis crossings along the tracked path");
  tracking_flags(margin, raw);
  auto* validate = app.add_subcommand("validate", "Compare the tracked path with full spectra");
  tracking_flags(validate, raw);
  validate->add_option("--checkpoints", raw.checkpoints, "Number of equispaced checkpoints");
  validate->add_option("--pass-tol", raw.pass_tol, "Distance below which a checkpoint matches");

  auto* gen = app.add_subcommand("gen", "Write a random sparse model bundle");
  gen->add_option("--r", raw.r, "Dimension")->check(CLI::PositiveNumber);
  gen->add_option("--n-dyn", raw.n_dyn, "Dynamic states (default r)");
  gen->add_option("--density", raw.density, "Nonzero density in (0, 1]");
  gen->add_option("--mu", raw.mu, "Number of delays");
  gen->add_option("--seed", raw.seed, "Random seed");
  gen->add_option("--out", raw.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dc::kConfigError;
  }

  dc::CommandFlags flags;
  const int converted = dc::guarded([&] {
    flags = convert(raw);
    return 0;
  }, std::cerr);
  if (converted != 0) return converted;
  if (spectrum->parsed() && !flags.p && flags.p_init) flags.p = flags.p_init;

  if (spectrum->parsed()) return dc::cmd_spectrum(raw.manifest, flags, std::cout, std::cerr);
  if (track->parsed()) return dc::cmd_track(raw.manifest, flags, std::cout, std::cerr);
  if (margin->parsed()) return dc::cmd_margin(raw.manifest, flags, std::cout, std::cerr);
  if (validate->parsed()) return dc::cmd_validate(raw.manifest, flags, std::cout, std::cerr);
  return dc::cmd_gen(flags, std::cout, std::cerr);
}
