// Copyright 2026 The LatentLens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "latentlens/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "latentlens/error.hpp"

namespace latentlens {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 11) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
         std::to_string(size) + "\">" + escape(s) + "</text>\n";
}

// Diverging blue-white-red map on [-1, 1].
std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t < 0) {
    r = static_cast<int>(255 * (1 + t));
    g = static_cast<int>(255 * (1 + t));
    b = 255;
  } else {
    r = 255;
    g = static_cast<int>(255 * (1 - t));
    b = static_cast<int>(255 * (1 - t));
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

// Sequential white-to-dark-blue map on [0, 1].
std::string sequential(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(255 - 225 * t);
  const int g = static_cast<int>(255 - 190 * t);
  const int b = static_cast<int>(255 - 100 * t);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string svg_line_plot(const std::vector<LineSeries>& series, const PlotOptions& o) {
  require(!series.empty(), "plot: no series to draw");
  const double left = 70, right = 20, top = 30, bottom = 50;
  const double pw = o.width - left - right, ph = o.height - top - bottom;
  auto tx = [&](double v) { return o.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return o.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!o.log_x || x > 0) && (!o.log_y || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), "plot: series '" + s.label + "' has mismatched x and y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  require(std::isfinite(x0), "plot: no drawable points");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::string svg = header(o.width, o.height);
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    svg += text(left + pw * i / 4.0, top + ph + 16, tick(o.log_x ? std::pow(10.0, fx) : fx));
    svg += text(left - 6, top + ph - ph * i / 4.0 + 4, tick(o.log_y ? std::pow(10.0, fy) : fy), "end");
  }
  if (!o.title.empty()) svg += text(o.width / 2.0, 18, o.title, "middle", 13);
  if (!o.x_label.empty()) svg += text(left + pw / 2, o.height - 12, o.x_label);
  if (!o.y_label.empty()) {
    svg += "<text x=\"14\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           num(top + ph / 2) + ")\">" + escape(o.y_label) + "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string d;
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) {
        pen = false;
        continue;
      }
      d += (pen ? " L" : (d.empty() ? "M" : " M")) + num(px(s.x[i])) + " " + num(py(s.y[i]));
      pen = true;
    }
    const char* colour = kPalette[k % std::size(kPalette)];
    svg += "<path class=\"series\" data-label=\"" + escape(s.label) + "\" d=\"" + d + "\" fill=\"none\" stroke=\"" +
           colour + "\" stroke-width=\"1.5\"/>\n";
    if (!s.label.empty()) {
      svg += "<text x=\"" + num(left + pw - 8) + "\" y=\"" + num(top + 14 + 14.0 * static_cast<double>(k)) +
             "\" text-anchor=\"end\" fill=\"" + colour + "\">" + escape(s.label) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string svg_heatmap(const Matrix& values, const PlotOptions& o, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels) {
  require(values.size() > 0, "heatmap: empty matrix");
  const double left = 70, right = 20, top = 30, bottom = 40;
  const double cw = (o.width - left - right) / static_cast<double>(values.cols());
  const double ch = (o.height - top - bottom) / static_cast<double>(values.rows());
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  const bool signed_map = lo < 0;
  const double scale = std::max(std::abs(lo), std::abs(hi));
  std::string svg = header(o.width, o.height);
  if (!o.title.empty()) svg += text(o.width / 2.0, 18, o.title, "middle", 13);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      const std::string fill = signed_map ? diverging(scale > 0 ? v / scale : 0.0)
                                          : sequential(hi > 0 ? v / hi : 0.0);
      svg += "<rect class=\"cell\" x=\"" + num(left + cw * static_cast<double>(c)) + "\" y=\"" +
             num(top + ch * static_cast<double>(r)) + "\" width=\"" + num(cw) + "\" height=\"" + num(ch) +
             "\" fill=\"" + fill + "\"><title>" + tick(v) + "</title></rect>\n";
    }
  }
  for (std::size_t r = 0; r < row_labels.size() && r < static_cast<std::size_t>(values.rows()); ++r) {
    svg += text(left - 4, top + ch * (static_cast<double>(r) + 0.5) + 4, row_labels[r], "end", 9);
  }
  for (std::size_t c = 0; c < col_labels.size() && c < static_cast<std::size_t>(values.cols()); ++c) {
    svg += text(left + cw * (static_cast<double>(c) + 0.5), o.height - bottom + 14, col_labels[c], "middle", 9);
  }
  if (!o.x_label.empty()) svg += text(left + (o.width - left - right) / 2, o.height - 6, o.x_label);
  svg += "</svg>\n";
  return svg;
}

std::string svg_mode_panels(const Matrix& modes, const GridMeta& grid, const PlotOptions& o,
                            const std::vector<std::string>& titles) {
  require(modes.cols() >= 1, "mode plot: no modes");
  grid.validate(static_cast<std::size_t>(modes.rows()));
  const int n = static_cast<int>(modes.cols());
  const int cols = std::min(n, 3);
  const int rows = (n + cols - 1) / cols;
  const double pw = 220, ph = grid.kind == GridKind::kCartesian2d ? 140 : 220;
  const int width = static_cast<int>(cols * pw + 20), height = static_cast<int>(rows * (ph + 30) + 40);
  std::string svg = header(width, height);
  if (!o.title.empty()) svg += text(width / 2.0, 18, o.title, "middle", 13);
  for (int m = 0; m < n; ++m) {
    const double ox = 10 + pw * (m % cols), oy = 40 + (ph + 30) * (m / cols);
    const Vector v = modes.col(m);
    const double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
    const std::string label = m < static_cast<int>(titles.size()) ? titles[static_cast<std::size_t>(m)]
                                                                   : "mode " + std::to_string(m + 1);
    svg += "<g class=\"panel\">\n" + text(ox + pw / 2, oy - 6, label);
    if (grid.kind == GridKind::kCartesian2d) {
      const std::size_t nx = grid.dims[0], ny = grid.dims[1];
      const double cw = (pw - 10) / static_cast<double>(nx), chh = (ph - 10) / static_cast<double>(ny);
      for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
          const double val = v(static_cast<Eigen::Index>(ix * ny + iy));
          svg += "<rect x=\"" + num(ox + cw * static_cast<double>(ix)) + "\" y=\"" +
                 num(oy + chh * static_cast<double>(ny - 1 - iy)) + "\" width=\"" + num(cw) + "\" height=\"" +
                 num(chh) + "\" fill=\"" + diverging(val / scale) + "\"/>\n";
        }
      }
    } else if (grid.kind == GridKind::kPolar) {
      const std::size_t nr = grid.dims[0], nth = grid.dims[1];
      const double cx = ox + pw / 2 - 5, cy = oy + ph / 2 - 5, rmax = ph / 2 - 10;
      const double dr = rmax / static_cast<double>(nr);
      const double dth = 2.0 * std::numbers::pi / static_cast<double>(nth);
      for (std::size_t ir = 0; ir < nr; ++ir) {
        for (std::size_t it = 0; it < nth; ++it) {
          const double r0 = dr * static_cast<double>(ir), r1 = dr * static_cast<double>(ir + 1);
          const double a0 = grid.coords[1][it] - dth / 2, a1 = a0 + dth;
          const double val = v(static_cast<Eigen::Index>(ir * nth + it));
          std::string d = "M" + num(cx + r0 * std::cos(a0)) + " " + num(cy - r0 * std::sin(a0)) + " L" +
                          num(cx + r1 * std::cos(a0)) + " " + num(cy - r1 * std::sin(a0)) + " A" + num(r1) + " " +
                          num(r1) + " 0 0 0 " + num(cx + r1 * std::cos(a1)) + " " + num(cy - r1 * std::sin(a1)) +
                          " L" + num(cx + r0 * std::cos(a1)) + " " + num(cy - r0 * std::sin(a1));
          if (ir > 0) d += " A" + num(r0) + " " + num(r0) + " 0 0 1 " + num(cx + r0 * std::cos(a0)) + " " +
                           num(cy - r0 * std::sin(a0));
          svg += "<path d=\"" + d + " Z\" fill=\"" + diverging(val / scale) + "\" stroke=\"#ccc\" stroke-width=\"0.3\"/>\n";
        }
      }
    } else {
      const double cw = (pw - 10) / static_cast<double>(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        svg += "<rect x=\"" + num(ox + cw * static_cast<double>(i)) + "\" y=\"" + num(oy) + "\" width=\"" + num(cw) +
               "\" height=\"" + num(ph - 10) + "\" fill=\"" + diverging(v(i) / scale) + "\"/>\n";
      }
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace latentlens
