#include "delaytrack/cli/trajectory_csv.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "delaytrack/error.hpp"

namespace delaytrack::cli {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw Error(ErrorCode::parse, "unterminated quoted CSV field");
  return fields;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const auto& samples = trajectory.samples;
  std::vector<std::string> tags(samples.size());
  const double direction =
      samples.size() > 1 && samples.back().p < samples.front().p ? -1.0 : 1.0;
  for (const auto& event : trajectory.events) {
    std::size_t at = samples.empty() ? 0 : samples.size() - 1;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (direction * (samples[k].p - event.p) >= -1e-15) {
        at = k;
        break;
      }
    }
    if (samples.empty()) break;
    if (!tags[at].empty()) tags[at] += ';';
    tags[at] += to_string(event.kind);
  }
  out << "p,s_r,s_i,residual,event\r\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    out << format_double(s.p) << ',' << format_double(s.s_r) << ',' << format_double(s.s_i) << ','
        << format_double(s.residual) << ',' << csv_field(tags[k]) << "\r\n";
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "empty trajectory CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "p,s_r,s_i,residual,event")
    throw Error(ErrorCode::parse, "unexpected trajectory CSV header: " + line);
  std::vector<TrajectoryRow> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5)
      throw Error(ErrorCode::parse, "trajectory CSV line " + std::to_string(number) + ": expected 5 fields");
    try {
      rows.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), f[4]});
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse, "trajectory CSV line " + std::to_string(number) + ": bad number");
    }
  }
  return rows;
}

}  // namespace delaytrack::cli
