#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dps/errors.hpp"

/**
 * Decision potential surface construction over a 2D input embedding.
 *
 * Pipeline: scattered (prompt, coords, phi) samples are normalized to the
 * unit square, resampled onto a regular grid (nearest neighbor, or
 * barycentric interpolation over a Delaunay triangulation with nodes outside
 * the convex hull masked invalid), and summarized as isohypses (contour
 * polylines per level) and epsilon strata (barrier / well / band labels).
 *
 * Both interpolators reproduce each sample's phi at the sample coordinate
 * and never leave the [min phi, max phi] range of the inputs. Contour
 * extraction is marching squares with linear edge interpolation; saddle
 * cells are disambiguated by the cell-center average. A level equal to the
 * minimum of a nonnegative field is degenerate (the field touches but never
 * crosses it), so extraction substitutes the effective threshold
 * kBoundaryLevel there; the returned set records the level actually traced.
 */

namespace dps {

// Effective threshold standing in for an exact minimum-level contour on a
// nonnegative field; also the styling cutoff for the decision boundary.
inline constexpr double kBoundaryLevel = 1e-6;

struct SamplePoint {
  std::string prompt_id;
  double u = 0.0;
  double v = 0.0;
  double phi = 0.0;
};

struct SurfaceGrid {
  int nx = 0;
  int ny = 0;
  std::vector<double> u_axis;  // nx ascending values spanning [0, 1]
  std::vector<double> v_axis;  // ny ascending values spanning [0, 1]
  std::vector<double> values;  // nx * ny, indexed [i * ny + j]
  std::vector<std::uint8_t> valid;

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * ny + j]; }
  bool is_valid(int i, int j) const {
    return valid[static_cast<std::size_t>(i) * ny + j] != 0;
  }
};

enum class InterpMethod { Nearest, Linear };

struct IsohypseSet {
  double level = 0.0;  // level actually traced (after any boundary substitution)
  std::vector<std::vector<std::array<double, 2>>> polylines;
  std::vector<bool> closed;
};

enum class StratumLabel : std::uint8_t { Barrier, Well, Isohypse, Invalid };

struct StrataGrid {
  double epsilon = 0.0;
  double band_tol = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<StratumLabel> labels;  // nx * ny, same layout as SurfaceGrid

  StratumLabel at(int i, int j) const {
    return labels[static_cast<std::size_t>(i) * ny + j];
  }
};

// Independent min-max map of each axis onto [0, 1]; a degenerate axis
// (max == min) maps to 0.5.
std::vector<std::array<double, 2>> normalize_coords(
    std::span<const std::array<double, 2>> coords);

// Mean-centered projection onto the top two principal directions. Sign
// convention: the largest-magnitude loading of each direction is positive.
std::vector<std::array<double, 2>> pca_2d(
    const std::vector<std::vector<double>>& embeddings);

// Nearest-sample field; distance ties resolve to the lowest point index.
class NearestField {
 public:
  explicit NearestField(std::span<const SamplePoint> points);
  double operator()(double u, double v) const;

 private:
  std::vector<SamplePoint> points_;
};

// Barycentric interpolation over a Delaunay triangulation of the sample
// coordinates; evaluates to nullopt outside the convex hull. Duplicate
// coordinates keep the first occurrence. Throws CollinearInput when the
// points span no area.
class LinearField {
 public:
  explicit LinearField(std::span<const SamplePoint> points);
  std::optional<double> operator()(double u, double v) const;
  int triangle_count() const { return static_cast<int>(triangles_.size()); }

 private:
  struct Triangle {
    int a, b, c;
  };
  std::vector<SamplePoint> points_;
  std::vector<Triangle> triangles_;
};

SurfaceGrid interpolate_grid(std::span<const SamplePoint> points, int nx, int ny,
                             InterpMethod method);

std::vector<IsohypseSet> extract_isohypses(const SurfaceGrid& grid,
                                           std::span<const double> levels,
                                           double boundary_level = kBoundaryLevel);

// Node labels: barrier where phi > epsilon + band_tol, well where
// phi < epsilon - band_tol, isohypse band between, invalid where masked.
StrataGrid stratify(const SurfaceGrid& grid, double epsilon, double band_tol);

}  // namespace dps
