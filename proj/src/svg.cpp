#include "ienergy/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ienergy::svg {

namespace {

const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
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

bool usable(double v, bool log_axis) { return std::isfinite(v) && (!log_axis || v > 0.0); }

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
};

Axis make_axis(double lo, double hi, bool log) {
  Axis a;
  a.log = log;
  if (log) {
    lo = std::log10(lo);
    hi = std::log10(hi);
  }
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 0.1, 0.5);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

std::string tick_label(const Axis& a, double t) {
  const double v = a.log ? std::pow(10.0, t) : t;
  return fmt(v, "%.4g");
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const PlotOpts& opts) {
  const double W = opts.width, H = opts.height;
  const double left = 78, right = 20, top = 36, bottom = 52;
  const double pw = W - left - right, ph = H - top - bottom;

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!usable(s.x[k], opts.log_x) || !usable(s.y[k], opts.log_y)) continue;
      xlo = std::min(xlo, s.x[k]);
      xhi = std::max(xhi, s.x[k]);
      ylo = std::min(ylo, s.y[k]);
      yhi = std::max(yhi, s.y[k]);
    }
  }
  if (!std::isfinite(xlo)) {
    xlo = ylo = 1.0;
    xhi = yhi = 10.0;
  }
  const Axis ax = make_axis(xlo, xhi, opts.log_x);
  const Axis ay = make_axis(ylo, yhi, opts.log_y);
  auto px = [&](double v) { return left + ax.map(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - ay.map(v)) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W, "%.0f") + "\" height=\"" + fmt(H, "%.0f") +
         "\" viewBox=\"0 0 " + fmt(W, "%.0f") + " " + fmt(H, "%.0f") + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(opts.title) +
         "</text>\n";
  out += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double fx = ax.lo + (ax.hi - ax.lo) * t / 5.0;
    const double x = left + pw * t / 5.0;
    out += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(top + ph) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(top + ph + 16) + "\" text-anchor=\"middle\">" + tick_label(ax, fx) +
           "</text>\n";
    const double fy = ay.lo + (ay.hi - ay.lo) * t / 5.0;
    const double y = top + ph - ph * t / 5.0;
    out += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(left + pw) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" + tick_label(ay, fy) +
           "</text>\n";
  }
  out += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(H - 12) + "\" text-anchor=\"middle\">" +
         escape(opts.x_label) + (opts.log_x ? " (log)" : "") + "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt(top + ph / 2) + ")\">" + escape(opts.y_label) + (opts.log_y ? " (log)" : "") + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string colour = kColours[si % (sizeof kColours / sizeof kColours[0])];
    std::string pts;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!usable(s.x[k], opts.log_x) || !usable(s.y[k], opts.log_y)) continue;
      pts += fmt(px(s.x[k])) + "," + fmt(py(s.y[k])) + " ";
      out += "<circle cx=\"" + fmt(px(s.x[k])) + "\" cy=\"" + fmt(py(s.y[k])) + "\" r=\"3\" fill=\"" + colour + "\"/>\n";
    }
    if (!pts.empty()) {
      pts.pop_back();
      out += "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    const double ly = top + 14 + 16.0 * static_cast<double>(si);
    out += "<rect x=\"" + fmt(left + pw - 150) + "\" y=\"" + fmt(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
           colour + "\"/>\n";
    out += "<text x=\"" + fmt(left + pw - 134) + "\" y=\"" + fmt(ly) + "\">" + escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ienergy::svg
