#pragma once

// Self-contained SVG 1.1 charts: 45-degree scatter panels and line charts.

#include <string>
#include <utility>
#include <vector>

#include "synthpop/eval.hpp"

namespace synthpop::plot {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Reference frequency on x, generated frequency on y, with the diagonal and
/// `corner_text` lines in the top-left corner.
std::string scatter_svg(const std::vector<eval::ScatterPoint>& points, const std::string& title,
                        const std::vector<std::string>& corner_text);

/// Polylines with markers and a legend. Points that cannot be drawn on a log
/// axis (value <= 0) are skipped.
std::string line_svg(const std::vector<Series>& series, const ChartOptions& options);

std::string xml_escape(const std::string& text);

}  // namespace synthpop::plot
