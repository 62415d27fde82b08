#pragma once

#include <filesystem>
#include <optional>

#include "delaytrack/init.hpp"
#include "delaytrack/model.hpp"
#include "delaytrack/track.hpp"

namespace delaytrack::cli {

inline constexpr int kManifestVersion = 1;

struct Manifest {
  std::filesystem::path path;
  ModelFamily family;
  double p_init = 0.0;
  TrackOptions tracking;  // p_fin, dp, method, corrector, regime, init
  // Fixed model of a delay-parameter family, kept so the varying term can be re-selected.
  std::optional<DelayedLinearModel> delay_base;
};

/// Parses a YAML manifest and every matrix file it references (paths are
/// relative to the manifest). Errors are prefixed with "<manifest>:<line>:".
Manifest load_manifest(const std::filesystem::path& path);

/// Rebuilds a delay-parameter family so that term `delay_index` (0-based) varies.
void select_varying_delay(Manifest& manifest, Index delay_index);

Regime parse_regime(const std::string& name);
Method parse_method(const std::string& name);
std::string_view to_string(Regime regime);
std::string_view to_string(Method method);

}  // namespace delaytrack::cli
