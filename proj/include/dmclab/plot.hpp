#pragma once

// Minimal SVG line chart.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dmclab/error.hpp"

namespace dmclab::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

inline std::string svg(const Chart& chart) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 50;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto tx = [&](double v) { return chart.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return chart.log_y ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw InvalidArgument("plot: x/y size mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((chart.log_x && !(s.x[i] > 0)) || (chart.log_y && !(s.y[i] > 0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return kL + (tx(v) - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double v) { return kH - kB - (ty(v) - y0) / (y1 - y0) * (kH - kT - kB); };
  auto fmt = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return std::string(b);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\">" << chart.title << "</text>\n"
     << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
     << kH - kB << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double vx = chart.log_x ? std::pow(10.0, fx) : fx;
    const double vy = chart.log_y ? std::pow(10.0, fy) : fy;
    os << "<text x=\"" << kL + (kW - kL - kR) * i / 4.0 << "\" y=\"" << kH - kB + 16
       << "\" text-anchor=\"middle\">" << fmt(vx) << "</text>\n"
       << "<text x=\"" << kL - 6 << "\" y=\"" << kH - kB - (kH - kT - kB) * i / 4.0 + 4
       << "\" text-anchor=\"end\">" << fmt(vy) << "</text>\n";
  }
  os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
     << chart.x_label << "</text>\n"
     << "<text x=\"15\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << kH / 2 << ")\">" << chart.y_label << "</text>\n";
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const auto& ser = chart.series[s];
    const char* color = colors[s % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if ((chart.log_x && !(ser.x[i] > 0)) || (chart.log_y && !(ser.y[i] > 0))) continue;
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      os << px(ser.x[i]) << ',' << py(ser.y[i]) << ' ';
    }
    os << "\"/>\n"
       << "<text x=\"" << kW - kR - 4 << "\" y=\"" << kT + 14 * (s + 1) << "\" text-anchor=\"end\" fill=\""
       << color << "\">" << ser.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dmclab::plot
