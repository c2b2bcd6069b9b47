// Copyright 2026 The samie Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Static SVG figures: metric-versus-labeled-size curves and a confusion
// matrix heat map. No plotting dependency; the output is plain markup.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "samie/evaluation.hpp"

namespace samie {

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string fmt(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

}  // namespace detail

struct CurveSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (labeled size, metric)
};

// Log2 x axis, y in [0, 1].
inline std::string svg_curves(const std::string& title, const std::string& ylabel, const std::vector<CurveSeries>& series) {
  const double W = 560, H = 380, L = 60, R = 150, T = 40, B = 50;
  double xmin = 1e300, xmax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, std::log2(x));
      xmax = std::max(xmax, std::log2(x));
    }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  auto px = [&](double x) { return L + (std::log2(x) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - std::clamp(y, 0.0, 1.0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << detail::xml_escape(title)
    << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = i / 5.0;
    o << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(y) << "\" y2=\"" << py(y)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << detail::fmt(y, 1) << "</text>\n";
  }
  std::vector<double> ticks;
  for (const auto& s : series)
    for (const auto& p : s.points) ticks.push_back(p.first);
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (double x : ticks)
    o << "<text x=\"" << px(x) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << x << "</text>\n";
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">labeled sentences</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << detail::xml_escape(ylabel) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    auto pts = series[i].points;
    std::sort(pts.begin(), pts.end());
    o << "<polyline fill=\"none\" stroke=\"" << detail::palette(i) << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) o << px(x) << "," << py(y) << " ";
    o << "\"/>\n";
    for (const auto& [x, y] : pts)
      o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << detail::palette(i) << "\"/>\n";
    const double ly = T + 16 + 18 * static_cast<double>(i);
    o << "<line x1=\"" << W - R + 12 << "\" x2=\"" << W - R + 32 << "\" y1=\"" << ly << "\" y2=\"" << ly
      << "\" stroke=\"" << detail::palette(i) << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 38 << "\" y=\"" << ly + 4 << "\">" << detail::xml_escape(series[i].name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// Rows gold, columns predicted; cells shaded by row-normalised mass.
inline std::string svg_heatmap(const std::string& title, const ConfusionMatrix& m,
                               const std::vector<std::string>& row_labels,
                               const std::vector<std::string>& col_labels) {
  const std::size_t n = m.size();
  const double cell = 44, L = 110, T = 110;
  const double W = L + cell * static_cast<double>(n) + 20, H = T + cell * static_cast<double>(n) + 20;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << detail::xml_escape(title)
    << "</text>\n";
  for (std::size_t g = 0; g < n; ++g) {
    const double total = std::max<long>(1, m.row_sum(g));
    const double y = T + cell * static_cast<double>(g);
    o << "<text x=\"" << L - 6 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"end\">"
      << detail::xml_escape(g < row_labels.size() ? row_labels[g] : std::to_string(g)) << "</text>\n";
    for (std::size_t p = 0; p < n; ++p) {
      const double frac = static_cast<double>(m.at(g, p)) / total;
      const int shade = static_cast<int>(std::lround(255 * (1 - frac)));
      const double x = L + cell * static_cast<double>(p);
      o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb("
        << shade << "," << shade << ",255)\" stroke=\"#999\"/>\n";
      o << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\" fill=\""
        << (frac > 0.5 ? "white" : "black") << "\">" << m.at(g, p) << "</text>\n";
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    const double x = L + cell * static_cast<double>(p) + cell / 2;
    o << "<text x=\"" << x << "\" y=\"" << T - 6 << "\" transform=\"rotate(-45 " << x << " " << T - 6 << ")\">"
      << detail::xml_escape(p < col_labels.size() ? col_labels[p] : std::to_string(p)) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace samie
