#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace pwmperc {

/// Minimal dependency-free line-plot writer. Plots are convenience artifacts;
/// the CSVs remain the contract.
class SvgPlot {
public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel, bool log_x = false)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)),
        log_x_(log_x) {}

  void add_series(std::string name, std::vector<double> xs, std::vector<double> ys) {
    series_.push_back({std::move(name), std::move(xs), std::move(ys)});
  }

  bool write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) return false;
    out << render();
    return bool(out);
  }

  std::string render() const {
    const double w = 640, h = 440;
    const double ml = 70, mr = 150, mt = 40, mb = 55;  // margins; legend on the right
    const double pw = w - ml - mr, ph = h - mt - mb;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        const double x = tx(s.xs[i]);
        if (!std::isfinite(x)) continue;
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, s.ys[i]);
        y_max = std::max(y_max, s.ys[i]);
      }
    if (!(x_min < x_max)) { x_min -= 0.5; x_max += 0.5; }
    if (!(y_min < y_max)) { y_min -= 0.5; y_max += 0.5; }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double x) { return ml + (tx(x) - x_min) / (x_max - x_min) * pw; };
    auto py = [&](double y) { return mt + (y_max - y) / (y_max - y_min) * ph; };

    std::string svg;
    svg += "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(w) + "' height='" + num(h) +
           "' viewBox='0 0 " + num(w) + " " + num(h) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";
    svg += "<text x='" + num(w / 2) + "' y='22' text-anchor='middle' font-size='15'>" + title_ +
           "</text>\n";

    // frame
    svg += "<rect x='" + num(ml) + "' y='" + num(mt) + "' width='" + num(pw) + "' height='" +
           num(ph) + "' fill='none' stroke='black'/>\n";

    // ticks
    for (int i = 0; i <= 5; ++i) {
      const double fy = y_min + (y_max - y_min) * i / 5.0;
      const double yy = py(fy);
      svg += "<line x1='" + num(ml - 4) + "' y1='" + num(yy) + "' x2='" + num(ml) + "' y2='" +
             num(yy) + "' stroke='black'/>\n";
      svg += "<text x='" + num(ml - 8) + "' y='" + num(yy + 4) +
             "' text-anchor='end' font-size='11'>" + num(fy) + "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
      const double fx = x_min + (x_max - x_min) * i / 5.0;
      const double xx = ml + pw * i / 5.0;
      svg += "<line x1='" + num(xx) + "' y1='" + num(mt + ph) + "' x2='" + num(xx) + "' y2='" +
             num(mt + ph + 4) + "' stroke='black'/>\n";
      const double label = log_x_ ? std::pow(10.0, fx) : fx;
      svg += "<text x='" + num(xx) + "' y='" + num(mt + ph + 18) +
             "' text-anchor='middle' font-size='11'>" + num(label) + "</text>\n";
    }
    svg += "<text x='" + num(ml + pw / 2) + "' y='" + num(h - 12) +
           "' text-anchor='middle' font-size='13'>" + xlabel_ + "</text>\n";
    svg += "<text x='16' y='" + num(mt + ph / 2) + "' text-anchor='middle' font-size='13' " +
           "transform='rotate(-90 16 " + num(mt + ph / 2) + ")'>" + ylabel_ + "</text>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    for (std::size_t si = 0; si < series_.size(); ++si) {
      const auto& s = series_[si];
      const char* color = palette[si % 8];
      std::string pts;
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (!std::isfinite(tx(s.xs[i]))) continue;
        pts += num(px(s.xs[i])) + "," + num(py(s.ys[i])) + " ";
      }
      svg += "<polyline points='" + pts + "' fill='none' stroke='" + std::string(color) +
             "' stroke-width='1.5'/>\n";
      const double ly = mt + 16 + 18 * static_cast<double>(si);
      svg += "<line x1='" + num(w - mr + 10) + "' y1='" + num(ly) + "' x2='" + num(w - mr + 34) +
             "' y2='" + num(ly) + "' stroke='" + color + "' stroke-width='2'/>\n";
      svg += "<text x='" + num(w - mr + 40) + "' y='" + num(ly + 4) + "' font-size='11'>" +
             s.name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
  }

private:
  struct Series {
    std::string name;
    std::vector<double> xs, ys;
  };

  double tx(double x) const { return log_x_ ? std::log10(x) : x; }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
  }

  std::string title_, xlabel_, ylabel_;
  bool log_x_;
  std::vector<Series> series_;
};

}  // namespace pwmperc
