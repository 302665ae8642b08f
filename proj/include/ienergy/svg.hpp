#pragma once

#include <string>
#include <vector>

namespace ienergy::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOpts {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Self-contained SVG line plot with markers. Points that are non-finite, or
/// nonpositive on a log axis, are skipped.
std::string line_plot(const std::vector<Series>& series, const PlotOpts& opts);

}  // namespace ienergy::svg
