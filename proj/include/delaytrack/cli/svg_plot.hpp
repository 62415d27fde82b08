#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "delaytrack/track.hpp"

namespace delaytrack::cli {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> lines;
  std::vector<std::pair<double, double>> markers;
  bool zero_x_axis = false;  // draw the vertical line x = 0
};

std::string render_svg(const PlotSpec& spec);

/// Writes <prefix>-locus.svg (s_i against s_r) and <prefix>-damping.svg
/// (damping ratio against p).
void write_trajectory_plots(const std::string& prefix, const Trajectory& trajectory,
                            const std::vector<Crossing>& crossings);

}  // namespace delaytrack::cli
