// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal dependency-free SVG line and scatter plots.

#ifndef POPALIGN_SVG_H_
#define POPALIGN_SVG_H_

#include <span>
#include <string>
#include <vector>

namespace popalign {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 400;
};

// Polyline per series.
std::string LinePlotSvg(const PlotStyle& style, std::span<const PlotSeries> series);
// One dot per point.
std::string ScatterPlotSvg(const PlotStyle& style, std::span<const PlotSeries> series);

// Escapes &, <, > and quotes for SVG text nodes.
std::string SvgEscape(const std::string& text);

}  // namespace popalign

#endif  // POPALIGN_SVG_H_
