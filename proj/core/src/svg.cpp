#include "dps/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dps {

namespace {

std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
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

// Two-stop perceptual ramp (dark violet to yellow).
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(68.0 + t * (253.0 - 68.0)));
  const int g = static_cast<int>(std::lround(1.0 + t * (231.0 - 1.0)));
  const int b = static_cast<int>(std::lround(84.0 + t * (37.0 - 84.0)));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_svg(const SurfaceGrid& grid,
                       std::span<const IsohypseSet> isohypses,
                       const SvgStyle& style) {
  const int cell = std::max(style.cell_px, 1);
  const int margin = std::max(style.margin_px, 0);
  const int width = 2 * margin + grid.nx * cell;
  const int height = 2 * margin + grid.ny * cell;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t idx = 0; idx < grid.values.size(); ++idx) {
    if (!grid.valid[idx]) continue;
    lo = std::min(lo, grid.values[idx]);
    hi = std::max(hi, grid.values[idx]);
  }
  const double range = hi - lo;

  // Grid node (i, j) renders as a cell centered at node_x/node_y; contour
  // coordinates in [0,1]^2 map through the same centers so polylines align
  // with the raster.
  auto node_x = [&](double u) {
    return margin + u * (grid.nx - 1) * cell + cell / 2.0;
  };
  auto node_y = [&](double v) {
    return margin + ((grid.ny - 1) - v * (grid.ny - 1)) * cell + cell / 2.0;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  if (!style.metadata_json.empty()) {
    svg += "<metadata id=\"runinfo\">" + xml_escape(style.metadata_json) +
           "</metadata>\n";
  }
  svg += "<rect width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";

  svg += "<g id=\"heatmap\">\n";
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      if (!grid.is_valid(i, j)) continue;
      const double value = grid.at(i, j);
      const double t = range > 0.0 ? (value - lo) / range : 0.5;
      const int x = margin + i * cell;
      const int y = margin + (grid.ny - 1 - j) * cell;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(cell) + "\" height=\"" +
             std::to_string(cell) + "\" fill=\"" + ramp_color(t) + "\"/>\n";
    }
  }
  svg += "</g>\n";

  svg += "<g id=\"contours\" fill=\"none\">\n";
  for (const IsohypseSet& set : isohypses) {
    const bool boundary = set.level <= kBoundaryLevel;
    const std::string stroke = boundary ? "#d62728" : "#1a1a1a";
    const std::string stroke_width = boundary ? "2.5" : "1";
    const std::string label = fmt("%.4g", set.level);
    for (std::size_t p = 0; p < set.polylines.size(); ++p) {
      const auto& poly = set.polylines[p];
      if (poly.empty()) continue;
      std::string d;
      for (std::size_t v = 0; v < poly.size(); ++v) {
        d += (v == 0 ? "M" : " L");
        d += fmt("%.6g", node_x(poly[v][0]));
        d += ",";
        d += fmt("%.6g", node_y(poly[v][1]));
      }
      if (set.closed[p]) d += " Z";
      svg += "<path aria-label=\"level " + label + "\" d=\"" + d +
             "\" stroke=\"" + stroke + "\" stroke-width=\"" + stroke_width +
             "\"/>\n";
      if (style.show_labels) {
        svg += "<text x=\"" + fmt("%.6g", node_x(poly[0][0])) + "\" y=\"" +
               fmt("%.6g", node_y(poly[0][1])) +
               "\" font-size=\"10\" font-family=\"monospace\" fill=\"" +
               stroke + "\">" + label + "</text>\n";
      }
    }
  }
  svg += "</g>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace dps
