// Self-contained SVG line charts with optional quartile bands: the
// medians-over-n figures from the experiment summaries.

#pragma once

#include <string>
#include <vector>

namespace ddso {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;       // center line (median)
  std::vector<double> band_lo; // optional band, empty or same length as x
  std::vector<double> band_hi;
};

struct SvgOptions {
  std::string title;
  std::string x_label = "n";
  std::string y_label = "regret";
  bool log_y = false;
  int width = 640;
  int height = 420;
};

// Renders axes, tick labels, one polyline per series with an optional
// translucent band, and a legend. Throws std::invalid_argument for an empty
// series list and std::domain_error when log_y meets a nonpositive value.
std::string render_svg_lines(const std::vector<SvgSeries>& series, const SvgOptions& options);

void emit_svg_lines(const std::vector<SvgSeries>& series, const SvgOptions& options,
                    const std::string& path);

}  // namespace ddso
