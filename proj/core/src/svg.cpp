#include "rawsea/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rawsea::svg {

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", std::isfinite(v) ? v : 0.0);
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

std::string header(double w, double h, const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + num(w / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
}

struct Range {
  double lo;
  double hi;
};

Range value_range(const std::vector<Series>& series) {
  double lo = 0.0, hi = 0.0;
  for (const auto& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi};
}

std::string axes(double x0, double y0, double x1, double y1, Range r) {
  std::string s = "<line x1=\"" + num(x0) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y1) +
                  "\" stroke=\"black\"/>\n<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
                  "\" y2=\"" + num(y1) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = r.lo + (r.hi - r.lo) * i / 4.0;
    const double y = y1 - (y1 - y0) * i / 4.0;
    s += "<text x=\"" + num(x0 - 4) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  return s;
}

std::string legend(const std::vector<Series>& series, double x, double y) {
  std::string s;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double yy = y + 14.0 * i;
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(yy - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[i % kPalette.size()] + "\"/>\n<text x=\"" + num(x + 14) + "\" y=\"" + num(yy) + "\">" +
         escape(series[i].name) + "</text>\n";
  }
  return s;
}

}  // namespace

std::string bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<Series>& series) {
  const double group_w = 14.0 * std::max<std::size_t>(series.size(), 1) + 10.0;
  const double plot_w = std::max(200.0, group_w * categories.size());
  const double x0 = 60, y0 = 40, x1 = x0 + plot_w, y1 = 300;
  const Range r = value_range(series);
  std::string s = header(x1 + 140, y1 + 40, title) + axes(x0, y0, x1, y1, r);
  const auto ypos = [&](double v) { return y1 - (y1 - y0) * (v - r.lo) / (r.hi - r.lo); };
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = x0 + 5 + group_w * c;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double v = c < series[k].values.size() ? series[k].values[c] : 0.0;
      const double top = std::min(ypos(v), ypos(0.0));
      const double h = std::abs(ypos(v) - ypos(0.0));
      s += "<rect x=\"" + num(gx + 14.0 * k) + "\" y=\"" + num(top) + "\" width=\"12\" height=\"" + num(h) +
           "\" fill=\"" + kPalette[k % kPalette.size()] + "\"/>\n";
    }
    s += "<text x=\"" + num(gx + group_w / 2 - 5) + "\" y=\"" + num(y1 + 14) + "\" text-anchor=\"middle\">" +
         escape(categories[c]) + "</text>\n";
  }
  return s + legend(series, x1 + 10, y0 + 10) + "</svg>\n";
}

std::string line_chart(const std::string& title, const std::string& x_label, const std::vector<double>& x,
                       const std::vector<Series>& series) {
  const double x0 = 60, y0 = 40, x1 = 460, y1 = 300;
  const Range r = value_range(series);
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  for (double v : x) {
    xlo = std::min(xlo, v);
    xhi = std::max(xhi, v);
  }
  if (!(xhi > xlo)) {
    xlo = x.empty() ? 0.0 : x.front() - 1.0;
    xhi = xlo + 2.0;
  }
  const auto xpos = [&](double v) { return x0 + (x1 - x0) * (v - xlo) / (xhi - xlo); };
  const auto ypos = [&](double v) { return y1 - (y1 - y0) * (v - r.lo) / (r.hi - r.lo); };
  std::string s = header(x1 + 140, y1 + 50, title) + axes(x0, y0, x1, y1, r);
  for (double v : x) {
    s += "<text x=\"" + num(xpos(v)) + "\" y=\"" + num(y1 + 14) + "\" text-anchor=\"middle\">" + num(v) + "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(y1 + 34) + "\" text-anchor=\"middle\">" +
       escape(x_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::string pts;
    for (std::size_t i = 0; i < x.size() && i < series[k].values.size(); ++i) {
      pts += num(xpos(x[i])) + "," + num(ypos(series[k].values[i])) + " ";
    }
    s += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" + std::string(kPalette[k % kPalette.size()]) +
         "\" points=\"" + pts + "\"/>\n";
  }
  return s + legend(series, x1 + 10, y0 + 10) + "</svg>\n";
}

std::string heatmap(const std::string& title, const std::vector<std::string>& labels,
                    const std::vector<double>& values, double vmin, double vmax) {
  const std::size_t k = labels.size();
  const double cell = 36.0, x0 = 60.0, y0 = 40.0;
  std::string s = header(x0 + cell * k + 20, y0 + cell * k + 30, title);
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double v = i * k + j < values.size() ? values[i * k + j] : 0.0;
      const double t = std::clamp((v - vmin) / span, 0.0, 1.0);
      const int red = int(std::lround(255 * t)), blue = int(std::lround(255 * (1 - t)));
      char colour[16];
      std::snprintf(colour, sizeof colour, "#%02x40%02x", red, blue);
      s += "<rect x=\"" + num(x0 + cell * j) + "\" y=\"" + num(y0 + cell * i) + "\" width=\"" + num(cell) +
           "\" height=\"" + num(cell) + "\" fill=\"" + colour + "\"><title>" + escape(labels[i]) + "/" +
           escape(labels[j]) + " " + num(v) + "</title></rect>\n";
    }
    s += "<text x=\"" + num(x0 - 4) + "\" y=\"" + num(y0 + cell * i + cell / 2 + 4) + "\" text-anchor=\"end\">" +
         escape(labels[i]) + "</text>\n";
    s += "<text x=\"" + num(x0 + cell * i + cell / 2) + "\" y=\"" + num(y0 + cell * k + 14) +
         "\" text-anchor=\"middle\">" + escape(labels[i]) + "</text>\n";
  }
  return s + "</svg>\n";
}

}  // namespace rawsea::svg
