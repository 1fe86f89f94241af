#include "dps/surface.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <utility>

#include <Eigen/Dense>

namespace dps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross2(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}

}  // namespace

std::vector<std::array<double, 2>> normalize_coords(
    std::span<const std::array<double, 2>> coords) {
  if (coords.empty()) throw NotEnoughPoints("normalize_coords needs at least one point");
  double lo[2] = {kInf, kInf};
  double hi[2] = {-kInf, -kInf};
  for (const auto& c : coords) {
    for (int a = 0; a < 2; ++a) {
      if (!std::isfinite(c[a])) throw DomainError("coordinates must be finite");
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  std::vector<std::array<double, 2>> out;
  out.reserve(coords.size());
  for (const auto& c : coords) {
    std::array<double, 2> q;
    for (int a = 0; a < 2; ++a) {
      q[a] = hi[a] == lo[a] ? 0.5 : (c[a] - lo[a]) / (hi[a] - lo[a]);
    }
    out.push_back(q);
  }
  return out;
}

std::vector<std::array<double, 2>> pca_2d(
    const std::vector<std::vector<double>>& embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw DimensionError("pca_2d needs at least 2 vectors");
  const std::size_t d = embeddings.front().size();
  if (d < 2) throw DimensionError("pca_2d needs dimension >= 2");
  for (const auto& row : embeddings) {
    if (row.size() != d) throw DimensionError("pca_2d needs equal-length vectors");
  }

  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = embeddings[i][j];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.adjoint() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  // Eigenvalues come back ascending; take the last two columns.
  Eigen::VectorXd axes[2] = {solver.eigenvectors().col(d - 1),
                             solver.eigenvectors().col(d - 2)};
  for (auto& axis : axes) {
    // Largest-magnitude loading positive (first such index among ties).
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < axis.size(); ++j) {
      if (std::abs(axis(j)) > std::abs(axis(arg))) arg = j;
    }
    if (axis(arg) < 0.0) axis = -axis;
  }

  std::vector<std::array<double, 2>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({centered.row(i).dot(axes[0]), centered.row(i).dot(axes[1])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpolators
// ---------------------------------------------------------------------------

NearestField::NearestField(std::span<const SamplePoint> points)
    : points_(points.begin(), points.end()) {
  if (points_.empty()) throw NotEnoughPoints("nearest interpolation needs >= 1 point");
}

double NearestField::operator()(double u, double v) const {
  std::size_t arg = 0;
  double best = kInf;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double du = points_[i].u - u;
    const double dv = points_[i].v - v;
    const double d2 = du * du + dv * dv;
    if (d2 < best) {  // strict: distance ties keep the lowest point index
      best = d2;
      arg = i;
    }
  }
  return points_[arg].phi;
}

LinearField::LinearField(std::span<const SamplePoint> points) {
  // Exact-duplicate coordinates keep the first occurrence.
  for (const SamplePoint& p : points) {
    bool dup = false;
    for (const SamplePoint& q : points_) {
      if (q.u == p.u && q.v == p.v) {
        dup = true;
        break;
      }
    }
    if (!dup) points_.push_back(p);
  }
  const int n = static_cast<int>(points_.size());
  if (n < 3) throw NotEnoughPoints("linear interpolation needs >= 3 distinct points");

  double area = 0.0;
  for (int i = 2; i < n; ++i) {
    area = std::max(area, std::abs(cross2(points_[1].u - points_[0].u,
                                          points_[1].v - points_[0].v,
                                          points_[i].u - points_[0].u,
                                          points_[i].v - points_[0].v)));
  }
  if (area <= 1e-12) throw CollinearInput("sample coordinates are collinear");

  // Bowyer-Watson with a super triangle; insertion in input order keeps the
  // triangulation deterministic. Cocircular quads do not flip (strict
  // in-circle test), so regular lattices triangulate consistently too.
  struct P {
    double x, y;
  };
  std::vector<P> pts;
  pts.reserve(points_.size() + 3);
  double lo_x = kInf, lo_y = kInf, hi_x = -kInf, hi_y = -kInf;
  for (const SamplePoint& p : points_) {
    pts.push_back({p.u, p.v});
    lo_x = std::min(lo_x, p.u);
    hi_x = std::max(hi_x, p.u);
    lo_y = std::min(lo_y, p.v);
    hi_y = std::max(hi_y, p.v);
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1.0});
  const double cx = (lo_x + hi_x) / 2.0;
  const double cy = (lo_y + hi_y) / 2.0;
  pts.push_back({cx - 20.0 * span, cy - 10.0 * span});
  pts.push_back({cx + 20.0 * span, cy - 10.0 * span});
  pts.push_back({cx, cy + 20.0 * span});

  auto orient = [&pts](int a, int b, int c) {
    return cross2(pts[b].x - pts[a].x, pts[b].y - pts[a].y, pts[c].x - pts[a].x,
                  pts[c].y - pts[a].y);
  };
  auto in_circumcircle = [&pts, &orient](const Triangle& t, int p) {
    // Positive determinant means strictly inside for a counterclockwise t.
    const double ax = pts[t.a].x - pts[p].x, ay = pts[t.a].y - pts[p].y;
    const double bx = pts[t.b].x - pts[p].x, by = pts[t.b].y - pts[p].y;
    const double cx2 = pts[t.c].x - pts[p].x, cy2 = pts[t.c].y - pts[p].y;
    const double det = (ax * ax + ay * ay) * cross2(bx, by, cx2, cy2) -
                       (bx * bx + by * by) * cross2(ax, ay, cx2, cy2) +
                       (cx2 * cx2 + cy2 * cy2) * cross2(ax, ay, bx, by);
    (void)orient;
    return det > 0.0;
  };
  auto make_ccw = [&orient](Triangle t) {
    if (orient(t.a, t.b, t.c) < 0.0) std::swap(t.b, t.c);
    return t;
  };

  std::vector<Triangle> tris{make_ccw({n, n + 1, n + 2})};
  for (int i = 0; i < n; ++i) {
    std::vector<Triangle> keep;
    keep.reserve(tris.size());
    // Cavity boundary: directed edges of removed triangles seen exactly once.
    std::map<std::pair<int, int>, std::pair<int, std::pair<int, int>>> edges;
    auto add_edge = [&edges](int u, int v) {
      auto key = std::minmax(u, v);
      auto [it, fresh] = edges.emplace(key, std::make_pair(0, std::make_pair(u, v)));
      ++it->second.first;
      (void)fresh;
    };
    for (const Triangle& t : tris) {
      if (in_circumcircle(t, i)) {
        add_edge(t.a, t.b);
        add_edge(t.b, t.c);
        add_edge(t.c, t.a);
      } else {
        keep.push_back(t);
      }
    }
    for (const auto& [key, val] : edges) {
      (void)key;
      if (val.first != 1) continue;
      keep.push_back(make_ccw({val.second.first, val.second.second, i}));
    }
    tris = std::move(keep);
  }
  for (const Triangle& t : tris) {
    if (t.a >= n || t.b >= n || t.c >= n) continue;  // touches the super triangle
    triangles_.push_back(t);
  }
  if (triangles_.empty()) throw CollinearInput("triangulation produced no triangles");
}

std::optional<double> LinearField::operator()(double u, double v) const {
  constexpr double kEdgeTol = -1e-9;  // keeps hull-boundary queries inside
  for (const Triangle& t : triangles_) {
    const SamplePoint& a = points_[static_cast<std::size_t>(t.a)];
    const SamplePoint& b = points_[static_cast<std::size_t>(t.b)];
    const SamplePoint& c = points_[static_cast<std::size_t>(t.c)];
    const double denom = cross2(b.u - a.u, b.v - a.v, c.u - a.u, c.v - a.v);
    if (denom == 0.0) continue;
    const double wa = cross2(b.u - u, b.v - v, c.u - u, c.v - v) / denom;
    const double wb = cross2(c.u - u, c.v - v, a.u - u, a.v - v) / denom;
    const double wc = cross2(a.u - u, a.v - v, b.u - u, b.v - v) / denom;
    if (wa < kEdgeTol || wb < kEdgeTol || wc < kEdgeTol) continue;
    const double value = wa * a.phi + wb * b.phi + wc * c.phi;
    // Convexity guard against the epsilon tolerance above.
    const double lo = std::min({a.phi, b.phi, c.phi});
    const double hi = std::max({a.phi, b.phi, c.phi});
    return std::clamp(value, lo, hi);
  }
  return std::nullopt;
}

SurfaceGrid interpolate_grid(std::span<const SamplePoint> points, int nx, int ny,
                             InterpMethod method) {
  if (nx < 2 || ny < 2) throw DomainError("grid needs nx >= 2 and ny >= 2");
  SurfaceGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  grid.u_axis.resize(static_cast<std::size_t>(nx));
  grid.v_axis.resize(static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i) grid.u_axis[i] = static_cast<double>(i) / (nx - 1);
  for (int j = 0; j < ny; ++j) grid.v_axis[j] = static_cast<double>(j) / (ny - 1);
  grid.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  grid.valid.assign(static_cast<std::size_t>(nx) * ny, 1);

  if (method == InterpMethod::Nearest) {
    const NearestField field(points);
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        grid.values[static_cast<std::size_t>(i) * ny + j] =
            field(grid.u_axis[i], grid.v_axis[j]);
      }
    }
    return grid;
  }

  const LinearField field(points);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * ny + j;
      const std::optional<double> value = field(grid.u_axis[i], grid.v_axis[j]);
      if (value) {
        grid.values[idx] = *value;
      } else {
        grid.valid[idx] = 0;  // outside the convex hull
      }
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Marching squares
// ---------------------------------------------------------------------------

namespace {

// Contour vertices are identified by where they live, not by coordinates:
// kind 0 pins a grid node (exact corner hit), kind 1 pins a position along a
// canonical grid edge. Adjacent cells compute the same key bitwise, so
// chaining needs no geometric tolerance.
using VertexKey = std::tuple<int, std::int64_t, std::int64_t>;

struct SegEnd {
  VertexKey key;
  std::array<double, 2> pt;
};

struct Segment {
  SegEnd e[2];
};

IsohypseSet trace_level(const SurfaceGrid& grid, double level) {
  IsohypseSet set;
  set.level = level;
  const int nx = grid.nx, ny = grid.ny;

  auto node_id = [ny](int i, int j) {
    return static_cast<std::int64_t>(i) * ny + j;
  };
  // Crossing on the edge from node (i0,j0) toward (i1,j1); the caller always
  // passes the lower node id first, so shared edges interpolate identically.
  auto crossing = [&](int i0, int j0, int i1, int j1) {
    const double va = grid.at(i0, j0);
    const double vb = grid.at(i1, j1);
    const double t = (level - va) / (vb - va);
    SegEnd end;
    if (t <= 0.0) {
      end.key = {0, node_id(i0, j0), 0};
      end.pt = {grid.u_axis[i0], grid.v_axis[j0]};
    } else if (t >= 1.0) {
      end.key = {0, node_id(i1, j1), 0};
      end.pt = {grid.u_axis[i1], grid.v_axis[j1]};
    } else {
      const std::int64_t horizontal = (j0 == j1) ? 0 : 1;
      end.key = {1, node_id(i0, j0) * 2 + horizontal, std::bit_cast<std::int64_t>(t)};
      end.pt = {grid.u_axis[i0] + t * (grid.u_axis[i1] - grid.u_axis[i0]),
                grid.v_axis[j0] + t * (grid.v_axis[j1] - grid.v_axis[j0])};
    }
    return end;
  };

  std::vector<Segment> segs;
  auto emit = [&segs](const SegEnd& a, const SegEnd& b) {
    if (a.key == b.key) return;  // corner-degenerate, zero length
    segs.push_back({{a, b}});
  };

  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      if (!grid.is_valid(i, j) || !grid.is_valid(i + 1, j) ||
          !grid.is_valid(i + 1, j + 1) || !grid.is_valid(i, j + 1)) {
        continue;
      }
      const double v00 = grid.at(i, j);
      const double v10 = grid.at(i + 1, j);
      const double v11 = grid.at(i + 1, j + 1);
      const double v01 = grid.at(i, j + 1);
      const int mask = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) |
                       (v11 >= level ? 4 : 0) | (v01 >= level ? 8 : 0);
      if (mask == 0 || mask == 15) continue;

      auto B = [&] { return crossing(i, j, i + 1, j); };
      auto R = [&] { return crossing(i + 1, j, i + 1, j + 1); };
      auto T = [&] { return crossing(i, j + 1, i + 1, j + 1); };
      auto L = [&] { return crossing(i, j, i, j + 1); };

      switch (mask) {
        case 1: emit(L(), B()); break;
        case 2: emit(B(), R()); break;
        case 3: emit(L(), R()); break;
        case 4: emit(R(), T()); break;
        case 5: {  // saddle: corners 00 and 11 inside
          const double center = (v00 + v10 + v11 + v01) / 4.0;
          if (center >= level) {
            emit(L(), T());
            emit(B(), R());
          } else {
            emit(L(), B());
            emit(R(), T());
          }
          break;
        }
        case 6: emit(B(), T()); break;
        case 7: emit(L(), T()); break;
        case 8: emit(L(), T()); break;
        case 9: emit(B(), T()); break;
        case 10: {  // saddle: corners 10 and 01 inside
          const double center = (v00 + v10 + v11 + v01) / 4.0;
          if (center >= level) {
            emit(L(), B());
            emit(R(), T());
          } else {
            emit(B(), R());
            emit(L(), T());
          }
          break;
        }
        case 11: emit(R(), T()); break;
        case 12: emit(L(), R()); break;
        case 13: emit(B(), R()); break;
        case 14: emit(L(), B()); break;
        default: break;
      }
    }
  }

  // Chain segments into polylines by exact key adjacency.
  std::map<VertexKey, std::vector<int>> adj;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    adj[segs[s].e[0].key].push_back(static_cast<int>(s));
    adj[segs[s].e[1].key].push_back(static_cast<int>(s));
  }
  std::vector<char> used(segs.size(), 0);
  auto pick = [&](const VertexKey& key) {
    const auto it = adj.find(key);
    for (int cand : it->second) {
      if (!used[cand]) return cand;
    }
    return -1;
  };

  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = 1;
    std::vector<std::array<double, 2>> poly{segs[s0].e[0].pt, segs[s0].e[1].pt};
    VertexKey head = segs[s0].e[0].key;
    VertexKey tail = segs[s0].e[1].key;
    bool closed = false;
    for (int pass = 0; pass < 2 && !closed; ++pass) {
      while (true) {
        const int next = pick(tail);
        if (next < 0) break;
        used[next] = 1;
        const int other = segs[next].e[0].key == tail ? 1 : 0;
        poly.push_back(segs[next].e[other].pt);
        tail = segs[next].e[other].key;
        if (tail == head) {
          closed = true;
          break;
        }
      }
      if (!closed && pass == 0) {
        std::reverse(poly.begin(), poly.end());
        std::swap(head, tail);
      }
    }
    if (closed) poly.pop_back();  // closure is carried by the flag
    set.polylines.push_back(std::move(poly));
    set.closed.push_back(closed);
  }
  return set;
}

}  // namespace

std::vector<IsohypseSet> extract_isohypses(const SurfaceGrid& grid,
                                           std::span<const double> levels,
                                           double boundary_level) {
  if (grid.nx < 2 || grid.ny < 2) {
    throw DomainError("isohypse extraction needs a grid of at least 2x2 nodes");
  }
  double field_min = kInf;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      if (grid.is_valid(i, j)) field_min = std::min(field_min, grid.at(i, j));
    }
  }
  std::vector<IsohypseSet> out;
  out.reserve(levels.size());
  for (double level : levels) {
    double effective = level;
    // A level equal to the minimum of a nonnegative field is only touched,
    // never crossed; trace the boundary threshold instead.
    if (field_min >= 0.0 && field_min != kInf && level == field_min) {
      effective = std::max(level, boundary_level);
    }
    out.push_back(trace_level(grid, effective));
  }
  return out;
}

StrataGrid stratify(const SurfaceGrid& grid, double epsilon, double band_tol) {
  if (!(epsilon > 0.0)) throw DomainError("stratify requires epsilon > 0");
  if (band_tol < 0.0) throw DomainError("stratify requires band_tol >= 0");
  StrataGrid strata;
  strata.epsilon = epsilon;
  strata.band_tol = band_tol;
  strata.nx = grid.nx;
  strata.ny = grid.ny;
  strata.labels.resize(grid.values.size());
  for (std::size_t idx = 0; idx < grid.values.size(); ++idx) {
    if (!grid.valid[idx]) {
      strata.labels[idx] = StratumLabel::Invalid;
    } else if (grid.values[idx] > epsilon + band_tol) {
      strata.labels[idx] = StratumLabel::Barrier;
    } else if (grid.values[idx] < epsilon - band_tol) {
      strata.labels[idx] = StratumLabel::Well;
    } else {
      strata.labels[idx] = StratumLabel::Isohypse;
    }
  }
  return strata;
}

}  // namespace dps
