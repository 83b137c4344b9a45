#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace liumnl {

struct ChartPoint {
  double x;
  double y;
};

struct ChartSeries {
  std::string label;
  std::vector<ChartPoint> points;
};

namespace detail {

inline std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

/// A minimal static line chart, 800x600, with a log10-scaled y axis
/// (simulated MSE spans several orders of magnitude). Pure text emission;
/// no dependencies.
inline std::string render_line_chart_svg(const std::string& title, const std::string& x_label,
                                         const std::string& y_label,
                                         const std::vector<ChartSeries>& series) {
  constexpr double width = 800, height = 600;
  constexpr double ml = 80, mr = 180, mt = 50, mb = 60;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;

  double xmin = 0, xmax = 1, ymin = 1e300, ymax = -1e300;
  bool any = false;
  for (const ChartSeries& s : series)
    for (const ChartPoint& p : s.points) {
      if (p.y <= 0.0) continue;  // log scale drops non-positive values
      if (!any) {
        xmin = xmax = p.x;
        any = true;
      }
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  if (!any) {
    xmin = 0;
    xmax = 1;
    ymin = 0.1;
    ymax = 10;
  }
  if (xmax == xmin) xmax = xmin + 1;
  const double ly_min = std::floor(std::log10(ymin));
  const double ly_max = std::ceil(std::log10(ymax) + (ymax == ymin ? 1 : 0));

  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) {
    return mt + plot_h - (std::log10(y) - ly_min) / (ly_max - ly_min) * plot_h;
  };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};
  const char* dashes[] = {"", "6,3", "2,2", "8,3,2,3"};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  svg += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"18\">" + title + "</text>\n";

  // axes
  svg += "<line x1=\"" + detail::fmt1(ml) + "\" y1=\"" + detail::fmt1(mt) + "\" x2=\"" +
         detail::fmt1(ml) + "\" y2=\"" + detail::fmt1(mt + plot_h) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::fmt1(ml) + "\" y1=\"" + detail::fmt1(mt + plot_h) + "\" x2=\"" +
         detail::fmt1(ml + plot_w) + "\" y2=\"" + detail::fmt1(mt + plot_h) +
         "\" stroke=\"black\"/>\n";

  // y ticks at decades
  for (double e = ly_min; e <= ly_max + 1e-9; e += 1.0) {
    const double y = sy(std::pow(10.0, e));
    svg += "<line x1=\"" + detail::fmt1(ml - 5) + "\" y1=\"" + detail::fmt1(y) + "\" x2=\"" +
           detail::fmt1(ml + plot_w) + "\" y2=\"" + detail::fmt1(y) +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::fmt1(ml - 8) + "\" y=\"" + detail::fmt1(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
           detail::fmt_g(e) + "</text>\n";
  }

  // x ticks at the data points of the first series
  std::vector<double> xticks;
  if (!series.empty())
    for (const ChartPoint& p : series.front().points) xticks.push_back(p.x);
  if (xticks.empty()) xticks = {xmin, xmax};
  for (double t : xticks) {
    const double x = sx(t);
    svg += "<line x1=\"" + detail::fmt1(x) + "\" y1=\"" + detail::fmt1(mt + plot_h) + "\" x2=\"" +
           detail::fmt1(x) + "\" y2=\"" + detail::fmt1(mt + plot_h + 5) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::fmt1(x) + "\" y=\"" + detail::fmt1(mt + plot_h + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           detail::fmt_g(t) + "</text>\n";
  }

  svg += "<text x=\"" + detail::fmt1(ml + plot_w / 2) + "\" y=\"" + detail::fmt1(height - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + x_label +
         "</text>\n";
  svg += "<text x=\"20\" y=\"" + detail::fmt1(mt + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 20 " + detail::fmt1(mt + plot_h / 2) + ")\">" + y_label +
         "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % 12];
    const char* dash = dashes[(s / 12) % 4];
    std::string pts;
    for (const ChartPoint& p : series[s].points) {
      if (p.y <= 0.0) continue;
      pts += detail::fmt1(sx(p.x)) + "," + detail::fmt1(sy(p.y)) + " ";
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"";
    if (*dash) svg += " stroke-dasharray=\"" + std::string(dash) + "\"";
    svg += "/>\n";
    for (const ChartPoint& p : series[s].points) {
      if (p.y <= 0.0) continue;
      svg += "<circle cx=\"" + detail::fmt1(sx(p.x)) + "\" cy=\"" + detail::fmt1(sy(p.y)) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    const double lx = ml + plot_w + 15, ly0 = mt + 10 + 18.0 * static_cast<double>(s);
    svg += "<line x1=\"" + detail::fmt1(lx) + "\" y1=\"" + detail::fmt1(ly0) + "\" x2=\"" +
           detail::fmt1(lx + 22) + "\" y2=\"" + detail::fmt1(ly0) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::fmt1(lx + 28) + "\" y=\"" + detail::fmt1(ly0 + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + series[s].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace liumnl
