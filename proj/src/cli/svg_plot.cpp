#include "delaytrack/cli/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "delaytrack/error.hpp"

namespace delaytrack::cli {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

/// Round step of roughly span / 5.
double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return mag * (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0);
}

struct Bounds {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = -1, hi = 1;
    if (hi - lo < 1e-12) {
      const double pad = std::max(1e-6, std::abs(lo) * 0.1);
      lo -= pad;
      hi += pad;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  Bounds bx, by;
  for (const auto& line : spec.lines) {
    for (double v : line.x) bx.add(v);
    for (double v : line.y) by.add(v);
  }
  for (const auto& [x, y] : spec.markers) {
    bx.add(x);
    by.add(y);
  }
  if (spec.zero_x_axis) bx.add(0.0);
  bx.settle();
  by.settle();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - bx.lo) / (bx.hi - bx.lo) * pw; };
  auto Y = [&](double y) { return kTop + (by.hi - y) / (by.hi - by.lo) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << escape(spec.title) << "</text>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double sx = nice_step(bx.hi - bx.lo);
  for (double t = std::ceil(bx.lo / sx) * sx; t <= bx.hi; t += sx) {
    o << "<line x1=\"" << num(X(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(X(t)) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/>"
      << "<text x=\"" << num(X(t)) << "\" y=\"" << kTop + ph + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(t)
      << "</text>\n";
  }
  const double sy = nice_step(by.hi - by.lo);
  for (double t = std::ceil(by.lo / sy) * sy; t <= by.hi; t += sy) {
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(Y(t)) << "\" x2=\"" << kLeft << "\" y2=\""
      << num(Y(t)) << "\" stroke=\"black\"/>"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(Y(t) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(t)
      << "</text>\n";
  }
  if (spec.zero_x_axis && bx.lo < 0.0 && bx.hi > 0.0)
    o << "<line x1=\"" << num(X(0)) << "\" y1=\"" << kTop << "\" x2=\"" << num(X(0)) << "\" y2=\""
      << kTop + ph << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  if (by.lo < 0.0 && by.hi > 0.0)
    o << "<line x1=\"" << kLeft << "\" y1=\"" << num(Y(0)) << "\" x2=\"" << kLeft + pw << "\" y2=\""
      << num(Y(0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t l = 0; l < spec.lines.size(); ++l) {
    const auto& line = spec.lines[l];
    o << "<polyline fill=\"none\" stroke=\"" << colors[l % 4] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < line.x.size() && k < line.y.size(); ++k) {
      if (!std::isfinite(line.x[k]) || !std::isfinite(line.y[k])) continue;
      o << num(X(line.x[k])) << ',' << num(Y(line.y[k])) << ' ';
    }
    o << "\"/>\n";
  }
  for (const auto& [x, y] : spec.markers)
    o << "<circle cx=\"" << num(X(x)) << "\" cy=\"" << num(Y(y))
      << "\" r=\"4\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";

  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(spec.x_label)
    << "</text>\n"
    << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"13\" transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << escape(spec.y_label)
    << "</text>\n</svg>\n";
  return o.str();
}

void write_trajectory_plots(const std::string& prefix, const Trajectory& trajectory,
                            const std::vector<Crossing>& crossings) {
  Series locus, damping;
  for (const auto& s : trajectory.samples) {
    locus.x.push_back(s.s_r);
    locus.y.push_back(s.s_i);
    const double mag = std::abs(s.s());
    damping.x.push_back(s.p);
    damping.y.push_back(mag > 0.0 ? -s.s_r / mag : 1.0);
  }
  PlotSpec lp{"Root locus", "Re(s)", "Im(s)", {locus}, {}, true};
  PlotSpec dp{"Damping ratio", "p", "-Re(s)/|s|", {damping}, {}, false};
  for (const auto& c : crossings) {
    lp.markers.emplace_back(c.s.real(), c.s.imag());
    dp.markers.emplace_back(c.p, 0.0);
  }
  for (const auto& [name, spec] : {std::pair{prefix + "-locus.svg", &lp}, std::pair{prefix + "-damping.svg", &dp}}) {
    std::ofstream f(name);
    if (!f) throw Error(ErrorCode::missing_file, "cannot write " + name);
    f << render_svg(*spec);
  }
}

}  // namespace delaytrack::cli
