#include "synthpop/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace synthpop::plot {

namespace {

constexpr double kWidth = 480, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Scale {
  double lo = 0, hi = 1;
  bool log = false;
  double pixel_lo = 0, pixel_hi = 1;

  double map(double v) const {
    const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    const double t = b > a ? (x - a) / (b - a) : 0.5;
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

void header(std::ostringstream& s, const std::string& title) {
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
    << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"14\">" << xml_escape(title) << "</text>\n";
}

void axes(std::ostringstream& s, const Scale& x, const Scale& y, const std::string& x_label,
          const std::string& y_label) {
  s << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
    << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\"" << fmt(kWidth - kRight)
    << "\" y2=\"" << fmt(kHeight - kBottom) << "\"/>\n"
    << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
    << fmt(kHeight - kBottom) << "\"/>\n</g>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    const double xv = x.log ? std::pow(10.0, std::log10(x.lo) + t * (std::log10(x.hi) - std::log10(x.lo)))
                            : x.lo + t * (x.hi - x.lo);
    const double yv = y.log ? std::pow(10.0, std::log10(y.lo) + t * (std::log10(y.hi) - std::log10(y.lo)))
                            : y.lo + t * (y.hi - y.lo);
    s << "<text x=\"" << fmt(x.map(xv)) << "\" y=\"" << fmt(kHeight - kBottom + 15)
      << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    s << "<text x=\"" << fmt(kLeft - 5) << "\" y=\"" << fmt(y.map(yv) + 3) << "\" text-anchor=\"end\">"
      << tick_label(yv) << "</text>\n";
  }
  s << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2) << "\" y=\"" << fmt(kHeight - 15)
    << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(x_label) << "</text>\n";
  s << "<text x=\"15\" y=\"" << fmt((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" font-size=\"12\" "
    << "transform=\"rotate(-90 15 " << fmt((kTop + kHeight - kBottom) / 2) << ")\">" << xml_escape(y_label)
    << "</text>\n</g>\n";
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string scatter_svg(const std::vector<eval::ScatterPoint>& points, const std::string& title,
                        const std::vector<std::string>& corner_text) {
  double peak = 0.0;
  for (const auto& p : points) peak = std::max({peak, p.reference, p.generated});
  if (peak <= 0.0) peak = 1.0;
  peak *= 1.05;
  Scale x{0.0, peak, false, kLeft, kWidth - kRight};
  Scale y{0.0, peak, false, kHeight - kBottom, kTop};

  std::ostringstream s;
  header(s, title);
  axes(s, x, y, "reference frequency", "generated frequency");
  s << "<line x1=\"" << fmt(x.map(0)) << "\" y1=\"" << fmt(y.map(0)) << "\" x2=\"" << fmt(x.map(peak))
    << "\" y2=\"" << fmt(y.map(peak)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  s << "<g fill=\"" << kPalette[0] << "\" fill-opacity=\"0.6\">\n";
  for (const auto& p : points)
    s << "<circle cx=\"" << fmt(x.map(p.reference)) << "\" cy=\"" << fmt(y.map(p.generated)) << "\" r=\"2\"/>\n";
  s << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < corner_text.size(); ++i)
    s << "<text x=\"" << fmt(kLeft + 8) << "\" y=\"" << fmt(kTop + 14 + 14 * static_cast<double>(i)) << "\">"
      << xml_escape(corner_text[i]) << "</text>\n";
  s << "</g>\n</svg>\n";
  return s.str();
}

std::string line_svg(const std::vector<Series>& series, const ChartOptions& options) {
  auto drawable = [&](double vx, double vy) {
    return std::isfinite(vx) && std::isfinite(vy) && (!options.log_x || vx > 0) && (!options.log_y || vy > 0);
  };
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : series)
    for (const auto& [vx, vy] : s.points) {
      if (!drawable(vx, vy)) continue;
      x_lo = std::min(x_lo, vx);
      x_hi = std::max(x_hi, vx);
      y_lo = std::min(y_lo, vy);
      y_hi = std::max(y_hi, vy);
    }
  if (!(x_lo <= x_hi)) x_lo = options.log_x ? 1 : 0, x_hi = x_lo + 1;
  if (!(y_lo <= y_hi)) y_lo = options.log_y ? 1 : 0, y_hi = y_lo + 1;
  if (!options.log_y) y_lo = std::min(y_lo, 0.0);
  if (x_hi == x_lo) x_hi = options.log_x ? x_lo * 10 : x_lo + 1;
  if (y_hi == y_lo) y_hi = options.log_y ? y_lo * 10 : y_lo + 1;

  Scale x{x_lo, x_hi, options.log_x, kLeft, kWidth - kRight};
  Scale y{y_lo, y_hi, options.log_y, kHeight - kBottom, kTop};
  std::ostringstream s;
  header(s, options.title);
  axes(s, x, y, options.x_label, options.y_label);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string path;
    for (const auto& [vx, vy] : series[i].points) {
      if (!drawable(vx, vy)) continue;
      path += fmt(x.map(vx)) + "," + fmt(y.map(vy)) + " ";
    }
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << path << "\"/>\n";
    s << "<g fill=\"" << color << "\">\n";
    for (const auto& [vx, vy] : series[i].points)
      if (drawable(vx, vy)) s << "<circle cx=\"" << fmt(x.map(vx)) << "\" cy=\"" << fmt(y.map(vy)) << "\" r=\"2.5\"/>\n";
    s << "</g>\n";
    s << "<text x=\"" << fmt(kWidth - kRight - 110) << "\" y=\"" << fmt(kTop + 12 + 14 * static_cast<double>(i))
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << xml_escape(series[i].name)
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace synthpop::plot
