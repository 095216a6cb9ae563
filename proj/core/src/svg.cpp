#include "erlq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "erlq/errors.hpp"

namespace erlq {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

bool usable(double x, double y, bool log_y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  return !log_y || y > 0.0;
}

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
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
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

void write_line_chart(const std::string& path,
                      const std::vector<ChartSeries>& series,
                      const ChartOptions& options) {
  const double left = 72, right = 24, top = 40, bottom = 56;
  const double plot_w = options.width - left - right;
  const double plot_h = options.height - top - bottom;

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const ChartSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!usable(x, y, options.log_y)) continue;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      const double yv = options.log_y ? std::log10(y) : y;
      y_min = std::min(y_min, yv);
      y_max = std::max(y_max, yv);
    }
  }
  if (!(x_min <= x_max)) {  // nothing plottable
    x_min = 0;
    x_max = 1;
    y_min = 0;
    y_max = 1;
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }

  const auto x_px = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto y_px = [&](double yv) {
    return top + (y_max - yv) / (y_max - y_min) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 "
      << options.width << " " << options.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << options.width / 2 << "\" y=\"24\" font-family=\"sans-serif\""
      << " font-size=\"15\" text-anchor=\"middle\">" << escape(options.title)
      << "</text>\n";

  // Grid and tick labels.
  const int ticks = 5;
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
  for (int i = 0; i < ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / (ticks - 1);
    const double gx = x_px(fx);
    svg << "<line x1=\"" << px(gx) << "\" y1=\"" << px(top) << "\" x2=\""
        << px(gx) << "\" y2=\"" << px(top + plot_h)
        << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << px(gx) << "\" y=\"" << px(top + plot_h + 18)
        << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
  }
  for (int i = 0; i < ticks; ++i) {
    const double fy = y_min + (y_max - y_min) * i / (ticks - 1);
    const double gy = y_px(fy);
    const double label = options.log_y ? std::pow(10.0, fy) : fy;
    svg << "<line x1=\"" << px(left) << "\" y1=\"" << px(gy) << "\" x2=\""
        << px(left + plot_w) << "\" y2=\"" << px(gy)
        << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << px(left - 6) << "\" y=\"" << px(gy + 4)
        << "\" text-anchor=\"end\">" << num(label) << "</text>\n";
  }
  svg << "</g>\n";

  // Axes.
  svg << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\""
      << px(plot_w) << "\" height=\"" << px(plot_h)
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << options.width / 2 << "\" y=\""
      << options.height - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << escape(options.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << options.height / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 18 " << options.height / 2 << ")\">"
      << escape(options.y_label) << "</text>\n";

  // Series.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    std::ostringstream pts;
    bool any = false;
    for (const auto& [x, y] : series[s].points) {
      if (!usable(x, y, options.log_y)) continue;
      const double yv = options.log_y ? std::log10(y) : y;
      pts << (any ? " " : "") << px(x_px(x)) << ',' << px(y_px(yv));
      any = true;
    }
    if (!any) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
  }

  // Legend (only useful with several series).
  if (series.size() > 1) {
    double ly = top + 14;
    svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
      const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
      const double lx = left + plot_w - 150;
      svg << "<line x1=\"" << px(lx) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
          << px(lx + 22) << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
      svg << "<text x=\"" << px(lx + 28) << "\" y=\"" << px(ly) << "\">"
          << escape(series[s].name) << "</text>\n";
      ly += 16;
    }
    svg << "</g>\n";
  }

  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << svg.str();
  if (!out) throw ConfigError("failed writing file: " + path);
}

}  // namespace erlq
