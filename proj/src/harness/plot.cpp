#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>

#include "readward/harness.hpp"

namespace readward::harness {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& series,
                       const std::string& title) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  constexpr std::array<const char*, 4> kColours{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  double x_max = 1.0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  for (const auto& [_, curve] : series) {
    for (const auto& p : curve) {
      x_max = std::max(x_max, static_cast<double>(p.step));
      y_min = std::min(y_min, p.score);
      y_max = std::max(y_max, p.score);
    }
  }
  if (!(y_min <= y_max)) y_min = 0.0, y_max = 1.0;
  if (y_max - y_min < 1e-9) y_min -= 1.0, y_max += 1.0;

  auto px = [&](double x) { return kLeft + x / x_max * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y_min) / (y_max - y_min) * (kH - kTop - kBottom); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" "
                    "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
  svg += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.1f", kH - kBottom) + "\" x2=\"" +
         fmt("%.1f", kW - kRight) + "\" y2=\"" + fmt("%.1f", kH - kBottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.1f", kTop) + "\" x2=\"" + fmt("%.1f", kLeft) +
         "\" y2=\"" + fmt("%.1f", kH - kBottom) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y_min + (y_max - y_min) * i / 4.0;
    const double x = x_max * i / 4.0;
    svg += "<text x=\"" + fmt("%.1f", kLeft - 6) + "\" y=\"" + fmt("%.1f", py(y) + 4) + "\" text-anchor=\"end\">" +
           fmt("%.4g", y) + "</text>\n";
    svg += "<text x=\"" + fmt("%.1f", px(x)) + "\" y=\"" + fmt("%.1f", kH - kBottom + 16) +
           "\" text-anchor=\"middle\">" + fmt("%.3g", x) + "</text>\n";
  }
  svg += "<text x=\"320\" y=\"" + fmt("%.1f", kH - 10) + "\" text-anchor=\"middle\">steps</text>\n";
  svg += "<text x=\"16\" y=\"200\" transform=\"rotate(-90 16 200)\" text-anchor=\"middle\">mean score</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const auto& [name, curve] = series[i];
    const char* colour = kColours[i % kColours.size()];
    std::string points;
    for (const auto& p : curve) {
      points += fmt("%.1f", px(static_cast<double>(p.step))) + "," + fmt("%.1f", py(p.score)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" + points +
           "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(i);
    svg += "<text x=\"" + fmt("%.1f", kLeft + 10) + "\" y=\"" + fmt("%.1f", ly) + "\" fill=\"" + colour + "\">" +
           escape(name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace readward::harness
