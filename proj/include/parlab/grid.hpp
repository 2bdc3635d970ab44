#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <set>
#include <unordered_map>
#include <vector>

#include "parlab/errors.hpp"

namespace parlab {

using Point = std::array<double, 2>;  // y2 is ignored in 1D

/// Point in the space-time cylinder.
struct SpacetimePoint {
  Point y{0.0, 0.0};
  double t = 0.0;
};

/// dist_p(x1, x2) = max(|y1 - y2|, |t1 - t2|^(1/2)).
inline double parabolic_distance(const SpacetimePoint& x1, const SpacetimePoint& x2) {
  double dy = std::hypot(x1.y[0] - x2.y[0], x1.y[1] - x2.y[1]);
  double dt = std::sqrt(std::abs(x1.t - x2.t));
  return std::max(dy, dt);
}

/// Bounded spatial cross-section of the cylinder: a 1D interval or a simple
/// axis-aligned polygon in 2D. Zero lateral data is structural everywhere, so
/// the boundary itself is never discretized.
struct SpatialDomain {
  enum class Kind { interval, axis_polygon };

  Kind kind = Kind::interval;
  double lo = 0.0, hi = 0.0;            // interval
  std::vector<Point> vertices;          // polygon, closed implicitly
  bool origin_interior = false;         // assert 0 in Omega when set

  static SpatialDomain interval(double lo, double hi, bool origin_interior = false) {
    if (!(lo < hi)) throw Error(errc::bad_grid, "interval requires lo < hi");
    SpatialDomain d;
    d.kind = Kind::interval;
    d.lo = lo;
    d.hi = hi;
    d.origin_interior = origin_interior;
    if (origin_interior && !(lo < 0.0 && 0.0 < hi))
      throw Error(errc::origin_outside, "interval does not contain the spatial origin");
    return d;
  }

  static SpatialDomain axis_polygon(std::vector<Point> verts, bool origin_interior = false) {
    SpatialDomain d;
    d.kind = Kind::axis_polygon;
    d.vertices = std::move(verts);
    d.origin_interior = origin_interior;
    d.validate_polygon();
    if (origin_interior && !d.contains_strict({0.0, 0.0}))
      throw Error(errc::origin_outside, "polygon does not strictly contain the spatial origin");
    return d;
  }

  int dim() const { return kind == Kind::interval ? 1 : 2; }

  /// Strict interior test. A positive eps shrinks the domain by that margin,
  /// which the grid uses to keep lattice points that land on the boundary up
  /// to rounding from being misread as interior.
  bool contains_strict(const Point& y, double eps = 0.0) const {
    if (kind == Kind::interval) return lo + eps < y[0] && y[0] < hi - eps;
    if (on_polygon_boundary(y, std::max(eps, 1e-12 * std::max(1.0, diameter())))) return false;
    return winding_inside(y);
  }

  Point bbox_min() const {
    if (kind == Kind::interval) return {lo, 0.0};
    Point m{vertices[0][0], vertices[0][1]};
    for (const auto& v : vertices) {
      m[0] = std::min(m[0], v[0]);
      m[1] = std::min(m[1], v[1]);
    }
    return m;
  }

  Point bbox_max() const {
    if (kind == Kind::interval) return {hi, 0.0};
    Point m{vertices[0][0], vertices[0][1]};
    for (const auto& v : vertices) {
      m[0] = std::max(m[0], v[0]);
      m[1] = std::max(m[1], v[1]);
    }
    return m;
  }

  Point bbox_center() const {
    Point a = bbox_min(), b = bbox_max();
    return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
  }

  double diameter() const {
    Point a = bbox_min(), b = bbox_max();
    return std::hypot(b[0] - a[0], b[1] - a[1]);
  }

  // Narrowest gap between parallel boundary features; the grid spacing must
  // stay below half of it so stencils cannot tunnel through thin walls.
  double min_feature_width() const {
    if (kind == Kind::interval) return hi - lo;
    auto min_gap = [](std::set<double>& coords) {
      double g = std::numeric_limits<double>::infinity();
      double prev = std::numeric_limits<double>::quiet_NaN();
      for (double c : coords) {
        if (!std::isnan(prev)) g = std::min(g, c - prev);
        prev = c;
      }
      return g;
    };
    std::set<double> xs, ys;
    std::size_t n = vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Point& p = vertices[k];
      const Point& q = vertices[(k + 1) % n];
      if (p[0] == q[0]) xs.insert(p[0]);  // vertical edge
      if (p[1] == q[1]) ys.insert(p[1]);  // horizontal edge
    }
    return std::min(min_gap(xs), min_gap(ys));
  }

 private:
  void validate_polygon() const {
    std::size_t n = vertices.size();
    if (n < 4) throw Error(errc::bad_grid, "axis polygon needs at least 4 vertices");
    for (std::size_t k = 0; k < n; ++k) {
      const Point& p = vertices[k];
      const Point& q = vertices[(k + 1) % n];
      bool vert = p[0] == q[0] && p[1] != q[1];
      bool horiz = p[1] == q[1] && p[0] != q[0];
      if (!vert && !horiz)
        throw Error(errc::bad_grid, "polygon edge " + std::to_string(k) + " is not axis-aligned");
    }
    // simplicity: non-adjacent edges must not intersect
    auto overlap1d = [](double a0, double a1, double b0, double b1) {
      if (a0 > a1) std::swap(a0, a1);
      if (b0 > b1) std::swap(b0, b1);
      return std::max(a0, b0) <= std::min(a1, b1);
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        const Point &a = vertices[i], &b = vertices[(i + 1) % n];
        const Point &c = vertices[j], &d = vertices[(j + 1) % n];
        if (overlap1d(a[0], b[0], c[0], d[0]) && overlap1d(a[1], b[1], c[1], d[1]))
          throw Error(errc::bad_grid, "polygon is not simple (edges " + std::to_string(i) + "," +
                                          std::to_string(j) + " intersect)");
      }
    }
  }

  bool on_polygon_boundary(const Point& y, double eps) const {
    std::size_t n = vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Point& p = vertices[k];
      const Point& q = vertices[(k + 1) % n];
      double x0 = std::min(p[0], q[0]), x1 = std::max(p[0], q[0]);
      double y0 = std::min(p[1], q[1]), y1 = std::max(p[1], q[1]);
      if (y[0] >= x0 - eps && y[0] <= x1 + eps && y[1] >= y0 - eps && y[1] <= y1 + eps) {
        if (p[0] == q[0] && std::abs(y[0] - p[0]) <= eps) return true;
        if (p[1] == q[1] && std::abs(y[1] - p[1]) <= eps) return true;
      }
    }
    return false;
  }

  // even-odd rule with a horizontal ray; callers exclude boundary points first
  bool winding_inside(const Point& y) const {
    bool inside = false;
    std::size_t n = vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Point& p = vertices[k];
      const Point& q = vertices[(k + 1) % n];
      if ((p[1] > y[1]) != (q[1] > y[1])) {
        double xcross = p[0] + (y[1] - p[1]) / (q[1] - p[1]) * (q[0] - p[0]);
        if (y[0] < xcross) inside = !inside;
      }
    }
    return inside;
  }
};

/// Truncated time window Omega x (t_start, t_end) sampled at uniform dt.
/// This is the discretized space-time slab; the parabolic
/// boundary parts are implicit (lateral: structural zeros, bottom: the
/// initial slice, corner: lateral at t_start).
struct CylinderWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;

  CylinderWindow() = default;
  CylinderWindow(double a, double b, double step) : t_start(a), t_end(b), dt(step) {
    if (!(t_start < t_end)) throw Error(errc::bad_window, "window requires t_start < t_end");
    if (!(dt > 0.0)) throw Error(errc::bad_window, "window requires dt > 0");
    double real_steps = (t_end - t_start) / dt;
    double rounded = std::llround(real_steps);
    if (std::abs(real_steps - rounded) > 1e-12 * std::max(1.0, real_steps))
      throw Error(errc::bad_window, "window length is not an integer multiple of dt");
  }

  long long steps() const { return std::llround((t_end - t_start) / dt); }
  double time_at(long long k) const { return t_start + static_cast<double>(k) * dt; }
  double length() const { return t_end - t_start; }
};

/// Uniform lattice over a SpatialDomain. Nodes sit at integer multiples of
/// the per-axis spacing, anchored at the spatial origin, and only strictly
/// interior lattice points are stored; every absent stencil neighbour is a
/// structural zero (the lateral Dirichlet condition).
class Grid {
 public:
  static Grid build(const SpatialDomain& domain, std::array<double, 2> h) {
    Grid g;
    g.domain_ = domain;
    g.h_ = h;
    int d = domain.dim();
    for (int ax = 0; ax < d; ++ax)
      if (!(h[ax] > 0.0)) throw Error(errc::bad_grid, "grid spacing must be positive");
    double feature = domain.min_feature_width();
    for (int ax = 0; ax < d; ++ax)
      if (!(h[ax] < 0.5 * feature))
        throw Error(errc::bad_grid, "grid spacing must be below half the minimal feature width");
    if (domain.origin_interior && !domain.contains_strict({0.0, 0.0}))
      throw Error(errc::origin_outside, "spatial origin is not inside the domain");

    Point lo = domain.bbox_min(), hi = domain.bbox_max();
    auto irange = [&](int ax) {
      long long a = static_cast<long long>(std::floor(lo[ax] / h[ax])) - 1;
      long long b = static_cast<long long>(std::ceil(hi[ax] / h[ax])) + 1;
      return std::pair<long long, long long>{a, b};
    };

    auto [i0, i1] = irange(0);
    long long j0 = 0, j1 = 0;
    if (d == 2) std::tie(j0, j1) = irange(1);

    // Lattice points within snap_eps of the boundary count as boundary; this
    // keeps rounding in i*h from minting spurious interior nodes on aligned
    // domains such as (0, pi) with h = pi/m.
    const double snap_eps = 1e-6 * std::min(h[0], d == 2 ? h[1] : h[0]);
    for (long long j = j0; j <= j1; ++j) {
      for (long long i = i0; i <= i1; ++i) {
        Point y{static_cast<double>(i) * h[0], d == 2 ? static_cast<double>(j) * h[1] : 0.0};
        if (!domain.contains_strict(y, snap_eps)) continue;
        int idx = static_cast<int>(g.nodes_.size());
        g.lattice_.push_back({static_cast<int>(i), static_cast<int>(j)});
        g.nodes_.push_back(y);
        g.index_.emplace(key(static_cast<int>(i), static_cast<int>(j)), idx);
      }
      if (d == 1) break;
    }
    if (g.nodes_.empty()) throw Error(errc::empty_interior, "grid has no interior nodes");

    // Reference node: the origin when it is in Omega (it is then itself a
    // lattice point), otherwise the interior node nearest the bbox center.
    Point target{0.0, 0.0};
    g.reference_is_origin_ = domain.contains_strict(target);
    if (!g.reference_is_origin_) target = domain.bbox_center();
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(g.nodes_.size()); ++k) {
      double dist = std::hypot(g.nodes_[k][0] - target[0], g.nodes_[k][1] - target[1]);
      if (dist < best) {
        best = dist;
        g.reference_ = k;
      }
    }

    g.build_cells();
    return g;
  }

  int dim() const { return domain_.dim(); }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int idx) const { return nodes_[idx]; }
  std::array<double, 2> spacing() const { return h_; }
  const SpatialDomain& domain() const { return domain_; }

  int reference_node() const { return reference_; }
  bool reference_is_origin() const { return reference_is_origin_; }

  /// Dense index of lattice point (i, j); -1 when the point is not interior
  /// (i.e. it carries the structural zero boundary value).
  int index_of(int i, int j) const {
    auto it = index_.find(key(i, j));
    return it == index_.end() ? -1 : it->second;
  }

  std::array<int, 2> lattice_of(int idx) const { return lattice_[idx]; }

  /// Midpoints of the lattice cells covering Omega, used by the slab norm
  /// quadrature; weight per cell is the cell volume h1 (x h2).
  const std::vector<Point>& cell_midpoints() const { return cell_mid_; }
  double cell_weight() const { return dim() == 1 ? h_[0] : h_[0] * h_[1]; }

 private:
  static std::int64_t key(int i, int j) {
    return (static_cast<std::int64_t>(i) << 32) ^ (static_cast<std::int64_t>(j) & 0xffffffffLL);
  }

  void build_cells() {
    Point lo = domain_.bbox_min(), hi = domain_.bbox_max();
    int d = dim();
    long long i0 = static_cast<long long>(std::floor(lo[0] / h_[0])) - 1;
    long long i1 = static_cast<long long>(std::ceil(hi[0] / h_[0])) + 1;
    long long j0 = 0, j1 = 0;
    if (d == 2) {
      j0 = static_cast<long long>(std::floor(lo[1] / h_[1])) - 1;
      j1 = static_cast<long long>(std::ceil(hi[1] / h_[1])) + 1;
    }
    for (long long j = j0; j <= j1; ++j) {
      for (long long i = i0; i <= i1; ++i) {
        Point m{(static_cast<double>(i) + 0.5) * h_[0],
                d == 2 ? (static_cast<double>(j) + 0.5) * h_[1] : 0.0};
        if (domain_.contains_strict(m)) cell_mid_.push_back(m);
      }
      if (d == 1) break;
    }
  }

  SpatialDomain domain_;
  std::array<double, 2> h_{0.0, 0.0};
  std::vector<Point> nodes_;
  std::vector<std::array<int, 2>> lattice_;
  std::unordered_map<std::int64_t, int> index_;
  std::vector<Point> cell_mid_;
  int reference_ = -1;
  bool reference_is_origin_ = false;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(const SpatialDomain& domain, std::array<double, 2> h) {
  return std::make_shared<Grid>(Grid::build(domain, h));
}

inline GridPtr build_grid(const SpatialDomain& domain, double h) {
  return build_grid(domain, std::array<double, 2>{h, h});
}

}  // namespace parlab
