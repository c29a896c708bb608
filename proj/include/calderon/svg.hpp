// Deterministic SVG scatter plot of (log K, log max|grad u|) with the fitted
// regression line. All numbers go through fixed-precision formatting, so the
// same record always produces byte-identical output.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "calderon/experiment.hpp"

namespace calderon {

namespace detail {

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return std::string(buf);
}

}  // namespace detail

inline std::string render_svg_plot(const SweepRecord& rec) {
  if (rec.K_values.empty() || rec.K_values.size() != rec.max_grads.size())
    throw std::invalid_argument("render_svg_plot: incomplete record");

  const int width = 800, height = 600;
  const double ml = 80, mr = 30, mt = 50, mb = 70;

  std::vector<double> xs(rec.K_values.size()), ys(rec.K_values.size());
  for (std::size_t i = 0; i < rec.K_values.size(); ++i) {
    xs[i] = std::log(rec.K_values[i]);
    ys[i] = std::log(rec.max_grads[i]);
  }
  double x0 = *std::min_element(xs.begin(), xs.end());
  double x1 = *std::max_element(xs.begin(), xs.end());
  double y0 = *std::min_element(ys.begin(), ys.end());
  double y1 = *std::max_element(ys.begin(), ys.end());
  if (x1 - x0 < 1e-12) {
    x0 -= 1;
    x1 += 1;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 1;
    y1 += 1;
  }
  double padx = 0.05 * (x1 - x0), pady = 0.08 * (y1 - y0);
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;

  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";

  // axes with 5 ticks per direction
  for (int t = 0; t <= 4; ++t) {
    double xv = x0 + (x1 - x0) * t / 4.0;
    double yv = y0 + (y1 - y0) * t / 4.0;
    svg += "<line x1=\"" + detail::fmt("%.2f", px(xv)) + "\" y1=\"" +
           detail::fmt("%.2f", py(y0)) + "\" x2=\"" + detail::fmt("%.2f", px(xv)) + "\" y2=\"" +
           detail::fmt("%.2f", py(y1)) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + detail::fmt("%.2f", px(x0)) + "\" y1=\"" +
           detail::fmt("%.2f", py(yv)) + "\" x2=\"" + detail::fmt("%.2f", px(x1)) + "\" y2=\"" +
           detail::fmt("%.2f", py(yv)) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::fmt("%.2f", px(xv)) + "\" y=\"" +
           detail::fmt("%.2f", py(y0) + 20) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + detail::fmt("%.3f", xv) +
           "</text>\n";
    svg += "<text x=\"" + detail::fmt("%.2f", px(x0) - 8) + "\" y=\"" +
           detail::fmt("%.2f", py(yv) + 4) + "\" font-size=\"12\" text-anchor=\"end\">" +
           detail::fmt("%.3f", yv) + "</text>\n";
  }
  svg += "<line x1=\"" + detail::fmt("%.2f", px(x0)) + "\" y1=\"" + detail::fmt("%.2f", py(y0)) +
         "\" x2=\"" + detail::fmt("%.2f", px(x1)) + "\" y2=\"" + detail::fmt("%.2f", py(y0)) +
         "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  svg += "<line x1=\"" + detail::fmt("%.2f", px(x0)) + "\" y1=\"" + detail::fmt("%.2f", py(y0)) +
         "\" x2=\"" + detail::fmt("%.2f", px(x0)) + "\" y2=\"" + detail::fmt("%.2f", py(y1)) +
         "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";

  // fitted regression line across the data range
  const Regression& fit = rec.regression;
  svg += "<line x1=\"" + detail::fmt("%.2f", px(x0)) + "\" y1=\"" +
         detail::fmt("%.2f", py(fit.mu * x0 + fit.intercept)) + "\" x2=\"" +
         detail::fmt("%.2f", px(x1)) + "\" y2=\"" +
         detail::fmt("%.2f", py(fit.mu * x1 + fit.intercept)) +
         "\" stroke=\"#cc3333\" stroke-width=\"2\"/>\n";

  for (std::size_t i = 0; i < xs.size(); ++i) {
    double residual = ys[i] - (fit.mu * xs[i] + fit.intercept);
    svg += "<circle cx=\"" + detail::fmt("%.2f", px(xs[i])) + "\" cy=\"" +
           detail::fmt("%.2f", py(ys[i])) +
           "\" r=\"4\" fill=\"#3366aa\"><title>residual=" + detail::fmt("%.6f", residual) +
           "</title></circle>\n";
  }

  svg += "<text x=\"" + detail::fmt("%.2f", ml) + "\" y=\"28\" font-size=\"16\">" + rec.family +
         " interfaces: mu = " + detail::fmt("%.6f", fit.mu) +
         "  intercept = " + detail::fmt("%.6f", fit.intercept) +
         "  r2 = " + detail::fmt("%.6f", fit.r_squared) + "</text>\n";
  svg += "<text x=\"" + detail::fmt("%.2f", (ml + width - mr) / 2) +
         "\" y=\"592\" font-size=\"13\" text-anchor=\"middle\">log K</text>\n";
  svg += "<text x=\"16\" y=\"" + detail::fmt("%.2f", (mt + height - mb) / 2) +
         "\" font-size=\"13\" transform=\"rotate(-90 16 " +
         detail::fmt("%.2f", (mt + height - mb) / 2) + ")\">log max|grad u|</text>\n";
  svg += "</svg>\n";
  return svg;
}

inline void emit_svg_plot(const SweepRecord& rec, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("emit_svg_plot: cannot open " + path);
  os << render_svg_plot(rec);
}

}  // namespace calderon
