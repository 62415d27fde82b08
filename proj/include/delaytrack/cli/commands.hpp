#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "delaytrack/types.hpp"

namespace delaytrack::cli {

enum ExitCode : int {
  kOk = 0,
  kNoResult = 1,
  kConfigError = 2,
  kTruncated = 3,
  kNumericalFailure = 4,
};

struct CommandFlags {
  std::optional<double> dp;
  std::optional<std::string> method;
  std::optional<int> corrector_every;
  std::optional<double> tol;
  std::optional<double> p_init;
  std::optional<double> p_fin;
  std::optional<int> delay_index;  // 1-based
  std::optional<Complex> init_from;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> svg;
  int checkpoints = 11;
  double pass_tol = 1e-6;
  std::uint64_t seed = 1;
  bool reinit = false;
  // spectrum
  std::optional<double> p;
  std::optional<int> count;
  // gen
  Index r = 10;
  std::optional<Index> n_dyn;
  double density = 0.1;
  int mu = 1;
};

int cmd_spectrum(const std::filesystem::path& manifest, const CommandFlags& flags,
                 std::ostream& out, std::ostream& err);
int cmd_track(const std::filesystem::path& manifest, const CommandFlags& flags, std::ostream& out,
              std::ostream& err);
int cmd_margin(const std::filesystem::path& manifest, const CommandFlags& flags,
               std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& manifest, const CommandFlags& flags,
                 std::ostream& out, std::ostream& err);
int cmd_gen(const CommandFlags& flags, std::ostream& out, std::ostream& err);

/// Runs a command body, mapping library errors to exit codes and messages on `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

Complex parse_complex_pair(const std::string& text);

}  // namespace delaytrack::cli
