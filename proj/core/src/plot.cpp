#include "deeppde/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace deeppde {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0, kMargin = 60.0;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_open() {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) +
         " " + fmt(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string plot_error_scatter(std::span<const ResultRow> rows) {
  std::string svg = svg_open();
  svg += "<line x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(kHeight - kMargin) + "\" x2=\"" +
         fmt(kWidth - kMargin) + "\" y2=\"" + fmt(kHeight - kMargin) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(kMargin) + "\" x2=\"" +
         fmt(kMargin) + "\" y2=\"" + fmt(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"" + fmt(kHeight - 12.0) +
         "\" text-anchor=\"middle\" font-size=\"13\">evaluation time (s)</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(kHeight / 2) + "\" text-anchor=\"middle\" "
         "font-size=\"13\" transform=\"rotate(-90 16 " +
         fmt(kHeight / 2) + ")\">L2 error</text>\n";

  if (!rows.empty()) {
    // log-log placement with graceful handling of nonpositive values
    auto safe_log = [](double v) { return std::log10(std::max(v, 1e-16)); };
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const ResultRow& r : rows) {
      xmin = std::min(xmin, safe_log(r.test_time));
      xmax = std::max(xmax, safe_log(r.test_time));
      ymin = std::min(ymin, safe_log(r.l2_error));
      ymax = std::max(ymax, safe_log(r.l2_error));
    }
    if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
    int color = 0;
    for (const ResultRow& r : rows) {
      const double px = kMargin + (safe_log(r.test_time) - xmin) / (xmax - xmin) *
                                      (kWidth - 2 * kMargin);
      const double py = kHeight - kMargin - (safe_log(r.l2_error) - ymin) / (ymax - ymin) *
                                                (kHeight - 2 * kMargin);
      const char* c = kPalette[color % 8];
      svg += "<circle cx=\"" + fmt(px) + "\" cy=\"" + fmt(py) +
             "\" r=\"5\" fill=\"" + c + "\"/>\n";
      svg += "<text x=\"" + fmt(px + 8) + "\" y=\"" + fmt(py - 6) +
             "\" font-size=\"11\" fill=\"" + c + "\">" + escape(r.method) + "</text>\n";
      ++color;
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string plot_sample(std::span<const SamplePlotSeries> series) {
  std::string svg = svg_open();
  if (series.empty()) {
    svg += "</svg>\n";
    return svg;
  }
  const GridFunction& first = series[0].field;
  if (first.dims() == 1) {
    double ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
      for (double v : s.field.values.values()) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    int color = 0;
    for (const auto& s : series) {
      const int n = s.field.extents[0];
      std::string pts;
      for (int i = 0; i < n; ++i) {
        const double px = kMargin + static_cast<double>(i) / (n - 1) * (kWidth - 2 * kMargin);
        const double py = kHeight - kMargin -
                          (s.field.values[i] - ymin) / (ymax - ymin) *
                              (kHeight - 2 * kMargin);
        pts += fmt(px) + "," + fmt(py) + " ";
      }
      const char* c = kPalette[color % 8];
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" points=\"" + pts +
             "\"/>\n";
      svg += "<text x=\"" + fmt(kMargin + 8) + "\" y=\"" + fmt(kMargin + 16 + 16 * color) +
             "\" font-size=\"12\" fill=\"" + c + "\">" + escape(s.label) + "</text>\n";
      ++color;
    }
  } else {
    // heat maps side by side
    const double panel = (kWidth - 2 * kMargin) / static_cast<double>(series.size());
    double vmin = 1e300, vmax = -1e300;
    for (const auto& s : series)
      for (double v : s.field.values.values()) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
    if (vmax - vmin < 1e-12) vmax = vmin + 1.0;
    for (std::size_t p = 0; p < series.size(); ++p) {
      const GridFunction& g = series[p].field;
      const int nx = g.extents[0], ny = g.extents[1];
      const double x0 = kMargin + panel * static_cast<double>(p);
      const double cell_w = (panel - 10.0) / nx;
      const double cell_h = (kHeight - 2 * kMargin) / ny;
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
          const double t = (g.values.at({i, j}) - vmin) / (vmax - vmin);
          const int r = static_cast<int>(255 * t);
          const int b = static_cast<int>(255 * (1.0 - t));
          char color[16];
          std::snprintf(color, sizeof(color), "#%02x40%02x", r, b);
          svg += "<rect x=\"" + fmt(x0 + i * cell_w) + "\" y=\"" +
                 fmt(kMargin + j * cell_h) + "\" width=\"" + fmt(cell_w + 0.5) +
                 "\" height=\"" + fmt(cell_h + 0.5) + "\" fill=\"" + color + "\"/>\n";
        }
      svg += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(kMargin - 8) +
             "\" font-size=\"12\">" + escape(series[p].label) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

bool svg_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool saw_root = false;
  while (i < n) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {  // declaration
      const std::size_t end = text.find("?>", i);
      if (end == std::string::npos) return false;
      i = end + 2;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      const std::size_t end = text.find("-->", i);
      if (end == std::string::npos) return false;
      i = end + 3;
      continue;
    }
    const std::size_t close = text.find('>', i);
    if (close == std::string::npos) return false;
    std::string tag = text.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.empty()) return false;
    const bool is_end = tag[0] == '/';
    const bool self_close = tag.back() == '/';
    if (is_end) tag = tag.substr(1);
    if (self_close) tag.pop_back();
    // quoted attributes must balance
    int quotes = 0;
    for (char c : tag)
      if (c == '"') ++quotes;
    if (quotes % 2 != 0) return false;
    std::string name;
    for (char c : tag) {
      if (std::isspace(static_cast<unsigned char>(c))) break;
      name.push_back(c);
    }
    if (name.empty()) return false;
    if (is_end) {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (!self_close) {
      if (stack.empty() && saw_root) return false;  // single root element
      stack.push_back(name);
      saw_root = true;
    } else if (stack.empty() && saw_root) {
      return false;
    }
  }
  return stack.empty() && saw_root;
}

}  // namespace deeppde
