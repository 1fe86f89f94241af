#pragma once

#include <span>
#include <string>

#include "dps/surface.hpp"

namespace dps {

struct SvgStyle {
  int cell_px = 6;       // heatmap cell size
  int margin_px = 24;    // border around the heatmap
  bool show_labels = true;
  std::string metadata_json;  // embedded in a <metadata> element when non-empty
};

// Deterministic, self-contained SVG: a heatmap raster of the valid grid
// cells (linear color ramp over the value range) with one path element per
// contour polyline. Polylines at or below kBoundaryLevel are styled as the
// decision boundary. Identical inputs produce byte-identical output.
std::string render_svg(const SurfaceGrid& grid,
                       std::span<const IsohypseSet> isohypses,
                       const SvgStyle& style = {});

}  // namespace dps
