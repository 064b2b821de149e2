#pragma once

/// @file
/// Minimal SVG output: ladder plots with a fitted slope and density heatmaps.
/// Pure functions of their input; numbers are printed with fixed formats so
/// output is byte-stable.

#include <cstdio>
#include <optional>
#include <sstream>

#include "sublab/common.hpp"

namespace sublab::io {

inline std::string fmt(double v, const char* spec = "%.6g")
{
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string xml_escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

enum class AxisScale { Linear, Log };

struct PlotSpec
{
  std::string title;
  std::string x_label = "r";
  std::string y_label;
  AxisScale x_scale = AxisScale::Log;
  AxisScale y_scale = AxisScale::Log;
  /// Optional horizontal reference band [lo, hi] (e.g. expected value ± tolerance).
  std::optional<std::pair<double, double>> band;
};

struct PlotOutput
{
  std::string svg;  ///< empty when nothing was drawn
  std::string warning;
  std::optional<double> slope;
};

/// Least-squares slope of the transformed data (log-log slope for log axes).
inline std::optional<double> fitted_slope(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

/// Ladder plot with a fitted-slope annotation.
inline PlotOutput emit_plot(const std::vector<double>& xs, const std::vector<double>& ys, const PlotSpec& spec)
{
  PlotOutput out;
  if (xs.empty() || xs.size() != ys.size()) {
    out.warning = "no data to plot";
    return out;
  }
  auto tx = [&](double v) { return spec.x_scale == AxisScale::Log ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.y_scale == AxisScale::Log ? std::log10(v) : v; };
  std::vector<double> px, py;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = tx(xs[i]), b = ty(ys[i]);
    if (std::isfinite(a) && std::isfinite(b)) {
      px.push_back(a);
      py.push_back(b);
    }
  }
  if (px.empty()) {
    out.warning = "no finite points to plot";
    return out;
  }
  out.slope = fitted_slope(px, py);

  double x0 = *std::min_element(px.begin(), px.end()), x1 = *std::max_element(px.begin(), px.end());
  double y0 = *std::min_element(py.begin(), py.end()), y1 = *std::max_element(py.begin(), py.end());
  if (spec.band) {
    y0 = std::min(y0, ty(spec.band->first));
    y1 = std::max(y1, ty(spec.band->second));
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad_x = 0.05 * (x1 - x0), pad_y = 0.08 * (y1 - y0);
  x0 -= pad_x;
  x1 += pad_x;
  y0 -= pad_y;
  y1 += pad_y;

  const double w = 480, h = 320, l = 60, r = 20, t = 36, b = 44;
  auto sx = [&](double v) { return l + (v - x0) / (x1 - x0) * (w - l - r); };
  auto sy = [&](double v) { return h - b - (v - y0) / (y1 - y0) * (h - t - b); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
    << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << l << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(spec.title) << "</text>\n";
  if (spec.band) {
    const double ya = sy(ty(spec.band->second)), yb = sy(ty(spec.band->first));
    s << "<rect x=\"" << fmt(l) << "\" y=\"" << fmt(ya) << "\" width=\"" << fmt(w - l - r) << "\" height=\"" << fmt(yb - ya)
      << "\" fill=\"#dde8f5\"/>\n";
  }
  s << "<line x1=\"" << l << "\" y1=\"" << h - b << "\" x2=\"" << w - r << "\" y2=\"" << h - b << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << h - b << "\" stroke=\"black\"/>\n";
  const std::string xl = (spec.x_scale == AxisScale::Log ? "log10 " : "") + spec.x_label;
  const std::string yl = (spec.y_scale == AxisScale::Log ? "log10 " : "") + spec.y_label;
  s << "<text x=\"" << (w / 2) << "\" y=\"" << (h - 10) << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(xl)
    << "</text>\n";
  s << "<text x=\"12\" y=\"" << (h / 2) << "\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 12 " << (h / 2)
    << ")\">" << xml_escape(yl) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double vx = x0 + (x1 - x0) * k / 4.0, vy = y0 + (y1 - y0) * k / 4.0;
    s << "<text x=\"" << fmt(sx(vx) - 12) << "\" y=\"" << (h - b + 14) << "\" font-family=\"sans-serif\" font-size=\"9\">"
      << fmt(vx, "%.3g") << "</text>\n";
    s << "<text x=\"4\" y=\"" << fmt(sy(vy) + 3) << "\" font-family=\"sans-serif\" font-size=\"9\">" << fmt(vy, "%.3g")
      << "</text>\n";
  }
  if (px.size() > 1) {
    s << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < px.size(); ++i) s << (i ? " " : "") << fmt(sx(px[i])) << ',' << fmt(sy(py[i]));
    s << "\"/>\n";
  }
  for (std::size_t i = 0; i < px.size(); ++i)
    s << "<circle cx=\"" << fmt(sx(px[i])) << "\" cy=\"" << fmt(sy(py[i])) << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
  if (out.slope)
    s << "<text x=\"" << (w - r - 150) << "\" y=\"" << (t + 14) << "\" font-family=\"sans-serif\" font-size=\"12\">slope = "
      << fmt(*out.slope, "%.4f") << "</text>\n";
  s << "</svg>\n";
  out.svg = s.str();
  return out;
}

/// Heatmap of a rows×cols matrix (row 0 drawn at the bottom).
inline std::string svg_heatmap(const Mat& values, const std::string& title)
{
  const double cell = std::max(4.0, std::min(24.0, 400.0 / static_cast<double>(std::max(values.rows(), values.cols()))));
  const double w = cell * static_cast<double>(values.cols()) + 20, h = cell * static_cast<double>(values.rows()) + 44;
  const double vmax = values.size() ? std::max(values.maxCoeff(), 1e-300) : 1.0;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\"" << fmt(h) << "\">\n";
  s << "<text x=\"10\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(title) << " (max " << fmt(vmax)
    << ")</text>\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double a = std::clamp(values(i, j) / vmax, 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255 * (1.0 - a)));
      char color[16];
      std::snprintf(color, sizeof color, "#%02x%02xff", shade, shade);
      s << "<rect x=\"" << fmt(10 + cell * static_cast<double>(j)) << "\" y=\""
        << fmt(34 + cell * static_cast<double>(values.rows() - 1 - i)) << "\" width=\"" << fmt(cell) << "\" height=\"" << fmt(cell)
        << "\" fill=\"" << color << "\"/>\n";
    }
  s << "</svg>\n";
  return s.str();
}

}  // namespace sublab::io
