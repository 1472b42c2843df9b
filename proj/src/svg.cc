// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace popalign {
namespace {

constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 140.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 45.0;

// Fixed-precision number text, identical on every run.
std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;
  double width, height;

  double Px(double x) const {
    return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * (width - kMarginLeft - kMarginRight);
  }
  double Py(double y) const {
    return height - kMarginBottom -
           (y - y_lo) / (y_hi - y_lo) * (height - kMarginTop - kMarginBottom);
  }
};

Frame MakeFrame(const PlotStyle& style, std::span<const PlotSeries> series) {
  double x_lo = HUGE_VAL, x_hi = -HUGE_VAL, y_lo = HUGE_VAL, y_hi = -HUGE_VAL;
  for (const PlotSeries& s : series) {
    for (double v : s.x) {
      if (std::isfinite(v)) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
    }
    for (double v : s.y) {
      if (std::isfinite(v)) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
    }
  }
  if (!(x_lo < x_hi)) x_lo = (std::isfinite(x_lo) ? x_lo : 0.0) - 1.0, x_hi = x_lo + 2.0;
  if (!(y_lo < y_hi)) y_lo = (std::isfinite(y_lo) ? y_lo : 0.0) - 1.0, y_hi = y_lo + 2.0;
  return {x_lo, x_hi, y_lo, y_hi, static_cast<double>(style.width),
          static_cast<double>(style.height)};
}

void Header(std::ostringstream& os, const PlotStyle& style, const Frame& f) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
     << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << Num(f.width / 2) << "\" y=\"18\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << SvgEscape(style.title) << "</text>\n";
  const double x0 = f.Px(f.x_lo), x1 = f.Px(f.x_hi), y0 = f.Py(f.y_lo), y1 = f.Py(f.y_hi);
  os << "<rect x=\"" << Num(x0) << "\" y=\"" << Num(y1) << "\" width=\"" << Num(x1 - x0)
     << "\" height=\"" << Num(y0 - y1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
    os << "<text x=\"" << Num(f.Px(xv)) << "\" y=\"" << Num(y0 + 15)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << Tick(xv)
       << "</text>\n";
    os << "<text x=\"" << Num(x0 - 5) << "\" y=\"" << Num(f.Py(yv) + 3)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << Tick(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << Num((x0 + x1) / 2) << "\" y=\"" << Num(f.height - 8)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << SvgEscape(style.x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << Num((y0 + y1) / 2) << "\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
     << Num((y0 + y1) / 2) << ")\">" << SvgEscape(style.y_label) << "</text>\n";
}

void Legend(std::ostringstream& os, const Frame& f, std::span<const PlotSeries> series) {
  const double x = f.width - kMarginRight + 10;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kMarginTop + 10 + 16.0 * i;
    os << "<rect x=\"" << Num(x) << "\" y=\"" << Num(y - 8) << "\" width=\"10\" height=\"10\" "
       << "fill=\"" << series[i].color << "\"/>\n"
       << "<text x=\"" << Num(x + 14) << "\" y=\"" << Num(y + 1)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << SvgEscape(series[i].label)
       << "</text>\n";
  }
}

}  // namespace

std::string SvgEscape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string LinePlotSvg(const PlotStyle& style, std::span<const PlotSeries> series) {
  const Frame f = MakeFrame(style, series);
  std::ostringstream os;
  Header(os, style, f);
  for (const PlotSeries& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << Num(f.Px(s.x[i])) << ',' << Num(f.Py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
  }
  Legend(os, f, series);
  os << "</svg>\n";
  return os.str();
}

std::string ScatterPlotSvg(const PlotStyle& style, std::span<const PlotSeries> series) {
  const Frame f = MakeFrame(style, series);
  std::ostringstream os;
  Header(os, style, f);
  for (const PlotSeries& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << "<circle cx=\"" << Num(f.Px(s.x[i])) << "\" cy=\"" << Num(f.Py(s.y[i]))
         << "\" r=\"1.5\" fill=\"" << s.color << "\" fill-opacity=\"0.6\"/>\n";
    }
  }
  Legend(os, f, series);
  os << "</svg>\n";
  return os.str();
}

}  // namespace popalign
