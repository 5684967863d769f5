#include "dyadflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dyadflow/channel.hpp"

namespace dyadflow {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const SvgChart& chart) {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool first = true;
  for (const SvgSeries& s : chart.series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;
  y_min = std::min(y_min, 0.0);  // influence curves sit on a zero baseline
  const double ml = 64.0, mr = 16.0, mt = 36.0, mb = 48.0;
  const double pw = chart.width - ml - mr;
  const double ph = chart.height - mt - mb;
  const auto to_x = [&](double v) { return ml + (v - x_min) / (x_max - x_min) * pw; };
  const auto to_y = [&](double v) { return mt + ph - (v - y_min) / (y_max - y_min) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\""
      << chart.height << "\" viewBox=\"0 0 " << chart.width << " " << chart.height << "\">\n";
  svg << "<rect width=\"" << chart.width << "\" height=\"" << chart.height
      << "\" fill=\"#ffffff\"/>\n";
  for (const SvgBand& b : chart.bands) {
    const double lo = std::clamp(b.x_lo, x_min, x_max);
    const double hi = std::clamp(b.x_hi, x_min, x_max);
    if (hi <= lo) continue;
    svg << "<rect x=\"" << px(to_x(lo)) << "\" y=\"" << px(mt) << "\" width=\""
        << px(to_x(hi) - to_x(lo)) << "\" height=\"" << px(ph) << "\" fill=\"" << b.color
        << "\" fill-opacity=\"0.5\"/>\n";
  }
  // axes and ticks
  svg << "<rect x=\"" << px(ml) << "\" y=\"" << px(mt) << "\" width=\"" << px(pw)
      << "\" height=\"" << px(ph) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 5.0;
    const double fy = y_min + (y_max - y_min) * i / 5.0;
    svg << "<line x1=\"" << px(to_x(fx)) << "\" y1=\"" << px(mt + ph) << "\" x2=\""
        << px(to_x(fx)) << "\" y2=\"" << px(mt + ph + 4) << "\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << px(to_x(fx)) << "\" y=\"" << px(mt + ph + 16)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n";
    svg << "<line x1=\"" << px(ml - 4) << "\" y1=\"" << px(to_y(fy)) << "\" x2=\"" << px(ml)
        << "\" y2=\"" << px(to_y(fy)) << "\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << px(ml - 6) << "\" y=\"" << px(to_y(fy) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << tick_label(fy) << "</text>\n";
  }
  for (const SvgSeries& s : chart.series) {
    if (s.x.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) svg << " stroke-dasharray=\"6 3\"";
    svg << " points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (i) svg << ' ';
      svg << px(to_x(s.x[i])) << ',' << px(to_y(s.y[i]));
    }
    svg << "\"/>\n";
  }
  // legend, top-right inside the plot
  double ly = mt + 14.0;
  for (const SvgSeries& s : chart.series) {
    if (s.label.empty()) continue;
    svg << "<line x1=\"" << px(ml + pw - 150) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
        << px(ml + pw - 126) << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << "/>\n";
    svg << "<text x=\"" << px(ml + pw - 120) << "\" y=\"" << px(ly)
        << "\" font-size=\"11\">" << escape(s.label) << "</text>\n";
    ly += 14.0;
  }
  svg << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(mt - 12)
      << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(chart.title) << "</text>\n";
  svg << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(chart.height - 8)
      << "\" font-size=\"11\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << px(mt + ph / 2)
      << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << px(mt + ph / 2) << ")\">" << escape(chart.y_label) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::string& path, const SvgChart& chart) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw Error("not-found", "cannot write " + path);
  out << render_svg(chart);
}

}  // namespace dyadflow
