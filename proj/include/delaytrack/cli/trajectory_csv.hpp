#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "delaytrack/track.hpp"

namespace delaytrack::cli {

struct TrajectoryRow {
  double p = 0.0;
  double s_r = 0.0;
  double s_i = 0.0;
  double residual = 0.0;
  std::string event;
};

/// Header `p,s_r,s_i,residual,event`, one row per sample. Events are attached
/// to the first sample at or beyond their parameter value, joined by ';'.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& text);
std::vector<std::string> split_csv_line(const std::string& line);

std::string format_double(double value);

}  // namespace delaytrack::cli
