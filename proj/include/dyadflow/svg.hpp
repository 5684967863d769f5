#pragma once

#include <string>
#include <vector>

namespace dyadflow {

// Minimal deterministic SVG line charts (no external renderer; text output
// is diffable in tests).
struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#000000";
  std::string label;
  bool dashed = false;
};

struct SvgBand {
  double x_lo = 0.0;
  double x_hi = 0.0;
  std::string color = "#dddddd";
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::vector<SvgBand> bands;  // shaded vertical spans drawn behind series
  int width = 720;
  int height = 420;
};

std::string render_svg(const SvgChart& chart);
void write_svg(const std::string& path, const SvgChart& chart);

}  // namespace dyadflow
