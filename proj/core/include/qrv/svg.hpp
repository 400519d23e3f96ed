#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qrv {

struct SvgSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
  bool dashed = false;  // drawn as a horizontal reference when xs has one point
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
};

// Self-contained line chart with axes, ticks and a legend. Non-finite points
// are skipped.
void write_svg_chart(std::ostream& os, const SvgChart& chart);

}  // namespace qrv
