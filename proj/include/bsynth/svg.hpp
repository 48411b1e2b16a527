#ifndef BSYNTH_SVG_HPP
#define BSYNTH_SVG_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

// Minimal static line charts: lines, shaded interval bands, a vertical
// marker. Enough to mirror trend and gap figures without a plotting stack.

namespace bsynth::svg {

struct Band {
  std::vector<double> lo, hi;
  double opacity = 0.2;
};

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
  std::vector<Band> bands;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<double> marker_x;  // e.g. first treated time
  bool zero_line = false;
  double width = 640;
  double height = 400;
};

namespace detail {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

/// "Nice" tick positions covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi, int target = 6) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

/// Draws one chart into a group translated to (ox, oy).
inline void draw(std::ostream& out, const Chart& c, double ox, double oy) {
  const double left = 64, right = 16, top = 32, bottom = 48;
  const double pw = c.width - left - right, ph = c.height - top - bottom;
  Range xr, yr;
  for (const auto& s : c.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
    for (const auto& b : s.bands) {
      for (double v : b.lo) yr.add(v);
      for (double v : b.hi) yr.add(v);
    }
  }
  if (c.zero_line) yr.add(0.0);
  xr.finish();
  yr.finish();
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  out << "<g transform=\"translate(" << num(ox) << "," << num(oy) << ")\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(c.width) << "\" height=\"" << num(c.height)
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(c.width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(c.title) << "</text>\n";
  out << "<g font-size=\"10\" fill=\"#444\">\n";
  for (double t : ticks(xr.lo, xr.hi)) {
    out << "<line x1=\"" << num(px(t)) << "\" x2=\"" << num(px(t)) << "\" y1=\"" << num(top) << "\" y2=\""
        << num(top + ph) << "\" stroke=\"#eee\"/>\n";
    out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 14) << "\" text-anchor=\"middle\">" << num(t)
        << "</text>\n";
  }
  for (double t : ticks(yr.lo, yr.hi)) {
    out << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + pw) << "\" y1=\"" << num(py(t)) << "\" y2=\""
        << num(py(t)) << "\" stroke=\"#eee\"/>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 3) << "\" text-anchor=\"end\">" << num(t)
        << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(c.height - 8) << "\" text-anchor=\"middle\" font-size=\"11\">"
      << escape(c.x_label) << "</text>\n";
  out << "<text transform=\"translate(14," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">"
      << escape(c.y_label) << "</text>\n";
  if (c.zero_line)
    out << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + pw) << "\" y1=\"" << num(py(0)) << "\" y2=\""
        << num(py(0)) << "\" stroke=\"#000\" stroke-width=\"0.8\"/>\n";
  if (c.marker_x)
    out << "<line x1=\"" << num(px(*c.marker_x)) << "\" x2=\"" << num(px(*c.marker_x)) << "\" y1=\"" << num(top)
        << "\" y2=\"" << num(top + ph) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";

  for (const auto& s : c.series) {
    for (const auto& b : s.bands) {
      const std::size_t n = std::min({s.x.size(), b.lo.size(), b.hi.size()});
      if (n == 0) continue;
      out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"" << num(b.opacity) << "\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < n; ++i) out << num(px(s.x[i])) << "," << num(py(b.hi[i])) << " ";
      for (std::size_t i = n; i-- > 0;) out << num(px(s.x[i])) << "," << num(py(b.lo[i])) << " ";
      out << "\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
        << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (std::isfinite(s.y[i])) out << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
    out << "\"/>\n";
  }
  double ly = top + 12;
  for (const auto& s : c.series) {
    if (s.label.empty()) continue;
    out << "<line x1=\"" << num(left + 8) << "\" x2=\"" << num(left + 28) << "\" y1=\"" << num(ly - 4) << "\" y2=\""
        << num(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << "/>\n";
    out << "<text x=\"" << num(left + 32) << "\" y=\"" << num(ly) << "\" font-size=\"11\">" << escape(s.label)
        << "</text>\n";
    ly += 14;
  }
  out << "</g>\n";
}

}  // namespace detail

inline void write_chart(std::ostream& out, const Chart& chart) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(chart.width) << "\" height=\""
      << detail::num(chart.height) << "\" font-family=\"sans-serif\">\n";
  detail::draw(out, chart, 0, 0);
  out << "</svg>\n";
}

/// Small multiples laid out row by row, `columns` per row.
inline void write_grid(std::ostream& out, const std::vector<Chart>& charts, int columns = 4) {
  columns = std::max(1, columns);
  double w = 0, h = 0;
  for (const auto& c : charts) w = std::max(w, c.width), h = std::max(h, c.height);
  const int rows = (static_cast<int>(charts.size()) + columns - 1) / columns;
  const int cols = std::min<int>(columns, static_cast<int>(charts.size()));
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(w * std::max(cols, 1)) << "\" height=\""
      << detail::num(h * std::max(rows, 1)) << "\" font-family=\"sans-serif\">\n";
  for (std::size_t i = 0; i < charts.size(); ++i)
    detail::draw(out, charts[i], w * static_cast<double>(i % columns), h * static_cast<double>(i / columns));
  out << "</svg>\n";
}

}  // namespace bsynth::svg

#endif  // BSYNTH_SVG_HPP
