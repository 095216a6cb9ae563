#pragma once

#include <string>
#include <utility>
#include <vector>

namespace erlq {

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;  // points with y <= 0 are dropped
  int width = 860;
  int height = 520;
};

// Self-contained static line chart; no fonts or scripts beyond what every
// SVG renderer ships. Non-finite points are skipped. Deterministic bytes for
// identical input.
void write_line_chart(const std::string& path,
                      const std::vector<ChartSeries>& series,
                      const ChartOptions& options);

}  // namespace erlq
