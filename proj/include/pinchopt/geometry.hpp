#pragma once

// Line-of-sight blockage between a PA and a user in the horizontal plane.
//
// Obstacles are vertical cylinders as tall as the waveguides and users stand
// on the floor, so the 3-D segment is occluded exactly when its planar
// projection passes through the obstacle's footprint disc. All comparisons
// are exact; there is no epsilon slack.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "pinchopt/error.hpp"
#include "pinchopt/types.hpp"

namespace pinchopt {

struct SegmentQuery {
  Point2 pa;
  Point2 user;
  Obstacle obstacle;
};

struct ClosestPoint {
  Point2 point;
  double dist_m = 0.0;
};

/// Normalized projection of the PA->center vector onto the PA->user vector.
inline double projection_param(const SegmentQuery& q) {
  const Point2 v = q.user - q.pa;
  const double len2 = dot(v, v);
  if (!(len2 > 0.0)) throw DegenerateSegment("projection_param: PA and user coincide");
  const Point2 w = q.obstacle.center_m - q.pa;
  return dot(w, v) / len2;
}

/// Point of the closed segment nearest to the obstacle center, and its distance.
inline ClosestPoint closest_point_and_distance(const SegmentQuery& q) {
  const double t = projection_param(q);
  Point2 p;
  if (t <= 0.0) {
    p = q.pa;
  } else if (t >= 1.0) {
    p = q.user;
  } else {
    p = q.pa + t * (q.user - q.pa);
  }
  return {p, distance(q.obstacle.center_m, p)};
}

/// Blocked iff the foot of the perpendicular lies strictly inside the segment
/// and is within the radius (tie counts as blocked). With both endpoints
/// outside the disc, clamped feet can never be within the radius.
inline bool is_blocked(const SegmentQuery& q) {
  const double t = projection_param(q);
  if (!(t > 0.0 && t < 1.0)) return false;
  const Point2 p = q.pa + t * (q.user - q.pa);
  return distance(q.obstacle.center_m, p) <= q.obstacle.radius_m;
}

inline bool inside_disc(Point2 p, const Obstacle& o) {
  return distance(p, o.center_m) <= o.radius_m;
}

inline bool inside_any_disc(Point2 p, std::span<const Obstacle> obstacles) {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const Obstacle& o) { return inside_disc(p, o); });
}

/// 1 if no obstacle blocks the PA-user segment, else 0.
inline int los_indicator(Point2 pa, Point2 user, std::span<const Obstacle> obstacles) {
  if (pa == user) throw DegenerateSegment("los_indicator: PA and user coincide");
  for (const Obstacle& o : obstacles) {
    if (is_blocked({pa, user, o})) return 0;
  }
  return 1;
}

// Row-major LoS map over a rectangle; cell (ix, iy) is sampled at its center.
struct Raster {
  int nx = 0;
  int ny = 0;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * nx + ix]; }
  Point2 cell_center(int ix, int iy) const {
    return {x_min + (ix + 0.5) * (x_max - x_min) / nx, y_min + (iy + 0.5) * (y_max - y_min) / ny};
  }
};

inline Raster blockage_raster(Point2 pa, std::span<const Obstacle> obstacles, int nx, int ny,
                              double area_x, double area_y) {
  if (nx < 2 || ny < 2) throw InvalidArgument("blockage_raster: grid must be at least 2x2");
  Raster r{nx, ny, 0.0, area_x, 0.0, area_y, {}};
  r.cells.resize(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const Point2 c = r.cell_center(ix, iy);
      std::uint8_t v = 1;
      if (inside_any_disc(c, obstacles)) {
        v = 0;
      } else if (!(c == pa)) {
        v = static_cast<std::uint8_t>(los_indicator(pa, c, obstacles));
      }
      r.cells[static_cast<std::size_t>(iy) * nx + ix] = v;
    }
  }
  return r;
}

// First line: nx,ny,x_min,x_max,y_min,y_max. Then ny rows (y ascending) of nx values.
inline void write_raster_csv(const Raster& r, std::ostream& os) {
  os << "nx,ny,x_min,x_max,y_min,y_max\n";
  os << r.nx << ',' << r.ny << ',' << r.x_min << ',' << r.x_max << ',' << r.y_min << ','
     << r.y_max << '\n';
  for (int iy = 0; iy < r.ny; ++iy) {
    for (int ix = 0; ix < r.nx; ++ix) {
      if (ix) os << ',';
      os << static_cast<int>(r.at(ix, iy));
    }
    os << '\n';
  }
}

}  // namespace pinchopt
