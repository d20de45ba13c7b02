#pragma once

// Fixed-altitude lawnmower coverage over a polygonal region, split into
// contiguous groups of rows, one group per drone.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "terrapath/errors.hpp"
#include "terrapath/geo.hpp"
#include "terrapath/path.hpp"

namespace terrapath {

struct CameraModel {
  double hfov_deg = 73.7;
  double vfov_deg = 53.1;
  int image_width_px = 5472;
  int image_height_px = 3648;

  bool operator==(const CameraModel&) const = default;
};

struct PlanConfig {
  double altitude = 80.0;
  double sidelap = 0.8;
  double frontlap = 0.8;
  int n_drones = 3;
  std::vector<LocalPoint> roi;  // simple polygon, z ignored

  bool operator==(const PlanConfig&) const = default;
};

struct Footprint {
  double width = 0.0;   // across track, from the horizontal field of view
  double height = 0.0;  // along track, from the vertical field of view
};

inline void validate(const CameraModel& cam) {
  if (!(cam.hfov_deg > 0.0 && cam.hfov_deg < 180.0))
    throw ConfigError("hfov_deg", "must be in (0, 180)");
  if (!(cam.vfov_deg > 0.0 && cam.vfov_deg < 180.0))
    throw ConfigError("vfov_deg", "must be in (0, 180)");
  if (cam.image_width_px <= 0) throw ConfigError("image_width_px", "must be positive");
  if (cam.image_height_px <= 0) throw ConfigError("image_height_px", "must be positive");
}

inline Footprint footprint(double altitude, const CameraModel& cam) {
  if (!(altitude > 0.0) || !std::isfinite(altitude))
    throw InputError("footprint altitude must be positive");
  const double deg = std::numbers::pi / 180.0;
  return {2.0 * altitude * std::tan(cam.hfov_deg * deg / 2.0),
          2.0 * altitude * std::tan(cam.vfov_deg * deg / 2.0)};
}

namespace detail {

inline double cross(const LocalPoint& o, const LocalPoint& a, const LocalPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(const LocalPoint& p, const LocalPoint& a, const LocalPoint& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

inline bool segments_touch(const LocalPoint& a, const LocalPoint& b, const LocalPoint& c,
                           const LocalPoint& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

inline double signed_area(const std::vector<LocalPoint>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return s / 2.0;
}

/// Splits `lengths` into `groups` contiguous runs minimizing the largest run
/// total. Returns the start index of each run.
inline std::vector<std::size_t> balanced_partition(const std::vector<double>& lengths,
                                                   std::size_t groups) {
  const std::size_t n = lengths.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + lengths[i];
  const double inf = std::numeric_limits<double>::infinity();
  // cost[g][i]: best max-run for the first i items in g runs.
  std::vector<std::vector<double>> cost(groups + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(groups + 1, std::vector<std::size_t>(n + 1, 0));
  cost[0][0] = 0.0;
  for (std::size_t g = 1; g <= groups; ++g) {
    for (std::size_t i = g; i <= n; ++i) {
      for (std::size_t j = g - 1; j < i; ++j) {
        const double c = std::max(cost[g - 1][j], prefix[i] - prefix[j]);
        if (c < cost[g][i]) {
          cost[g][i] = c;
          cut[g][i] = j;
        }
      }
    }
  }
  std::vector<std::size_t> starts(groups);
  std::size_t i = n;
  for (std::size_t g = groups; g >= 1; --g) {
    starts[g - 1] = cut[g][i];
    i = cut[g][i];
  }
  return starts;
}

}  // namespace detail

inline void validate_roi(const std::vector<LocalPoint>& roi) {
  if (roi.size() < 3) throw ConfigError("roi", "polygon needs at least 3 vertices");
  for (const auto& p : roi)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("roi", "non-finite vertex");
  if (!(std::abs(detail::signed_area(roi)) > 1e-9))
    throw ConfigError("roi", "polygon has zero area");
  const std::size_t n = roi.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges share a vertex
      if (detail::segments_touch(roi[i], roi[(i + 1) % n], roi[j], roi[(j + 1) % n]))
        throw ConfigError("roi", "polygon is self-intersecting");
    }
  }
}

inline void validate(const PlanConfig& c) {
  if (!(c.altitude > 0.0) || !std::isfinite(c.altitude))
    throw ConfigError("altitude", "must be finite and > 0");
  if (!(c.sidelap >= 0.0 && c.sidelap < 1.0)) throw ConfigError("sidelap", "must be in [0, 1)");
  if (!(c.frontlap >= 0.0 && c.frontlap < 1.0)) throw ConfigError("frontlap", "must be in [0, 1)");
  if (c.n_drones < 1) throw ConfigError("n_drones", "must be >= 1");
  validate_roi(c.roi);
}

/// Spacing actually used by a plan.
struct PlanGeometry {
  Footprint footprint;
  double row_spacing = 0.0;
  double capture_spacing = 0.0;
  bool rows_along_x = true;
  std::size_t rows = 0;
};

inline PlanGeometry plan_geometry(const PlanConfig& cfg, const CameraModel& cam) {
  validate(cfg);
  validate(cam);
  PlanGeometry g;
  g.footprint = footprint(cfg.altitude, cam);
  g.row_spacing = g.footprint.width * (1.0 - cfg.sidelap);
  g.capture_spacing = g.footprint.height * (1.0 - cfg.frontlap);

  double minx = cfg.roi[0].x, maxx = minx, miny = cfg.roi[0].y, maxy = miny;
  for (const auto& p : cfg.roi) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  g.rows_along_x = (maxx - minx) >= (maxy - miny);
  const double across = g.rows_along_x ? maxy - miny : maxx - minx;
  g.rows = static_cast<std::size_t>(std::floor(across / g.row_spacing + 1e-9)) + 1;
  const auto drones = static_cast<std::size_t>(cfg.n_drones);
  if (g.rows % drones != 0) {
    // Round up so every drone flies the same number of rows.
    g.rows += drones - g.rows % drones;
    g.row_spacing = across / static_cast<double>(g.rows - 1);
  }
  return g;
}

/// Lawnmower coverage of cfg.roi. Rows run along the longer bounding-box
/// axis, spaced by footprint width * (1 - sidelap); captures along a row are
/// spaced by footprint height * (1 - frontlap). Row lists are split into
/// n_drones contiguous groups of near-equal total row length and each group
/// is flown serpentine.
inline std::vector<DronePath> boustrophedon(const PlanConfig& cfg, const CameraModel& cam,
                                            const Origin& origin) {
  const PlanGeometry g = plan_geometry(cfg, cam);

  // Work in (along, across) coordinates.
  std::vector<LocalPoint> poly;
  for (const auto& p : cfg.roi)
    poly.push_back(g.rows_along_x ? LocalPoint{p.x, p.y, 0} : LocalPoint{p.y, p.x, 0});
  double cmin = poly[0].y, cmax = cmin;
  for (const auto& p : poly) {
    cmin = std::min(cmin, p.y);
    cmax = std::max(cmax, p.y);
  }
  const double across = cmax - cmin;
  const double first = cmin + (across - static_cast<double>(g.rows - 1) * g.row_spacing) / 2.0;
  const double eps = 1e-9 * std::max(1.0, across);

  struct Piece {
    double c;
    double a0;
    double a1;
  };
  std::vector<Piece> pieces;
  for (std::size_t r = 0; r < g.rows; ++r) {
    const double c = first + static_cast<double>(r) * g.row_spacing;
    const double ce = std::clamp(c, cmin + eps, cmax - eps);
    std::vector<double> xs;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const auto& p = poly[i];
      const auto& q = poly[(i + 1) % poly.size()];
      if (p.y == q.y) continue;
      if ((p.y <= ce && ce < q.y) || (q.y <= ce && ce < p.y))
        xs.push_back(p.x + (ce - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2)
      if (xs[i + 1] > xs[i]) pieces.push_back({c, xs[i], xs[i + 1]});
  }

  const auto drones = static_cast<std::size_t>(cfg.n_drones);
  if (pieces.size() < drones)
    throw PlanEmpty("roi too small: " + std::to_string(pieces.size()) + " rows for " +
                    std::to_string(drones) + " drones");

  std::vector<double> lengths;
  for (const auto& p : pieces) lengths.push_back(p.a1 - p.a0);
  const auto starts = detail::balanced_partition(lengths, drones);

  std::vector<DronePath> paths;
  for (std::size_t d = 0; d < drones; ++d) {
    DronePath path{"drone" + std::to_string(d + 1), {}};
    const std::size_t end = d + 1 < drones ? starts[d + 1] : pieces.size();
    for (std::size_t i = starts[d]; i < end; ++i) {
      const Piece& piece = pieces[i];
      const double len = piece.a1 - piece.a0;
      const auto n = static_cast<std::size_t>(std::floor(len / g.capture_spacing + 1e-9)) + 1;
      const double start = piece.a0 + (len - static_cast<double>(n - 1) * g.capture_spacing) / 2.0;
      const bool reverse = (i - starts[d]) % 2 == 1;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kk = reverse ? n - 1 - k : k;
        const double a = start + static_cast<double>(kk) * g.capture_spacing;
        const LocalPoint p = g.rows_along_x ? LocalPoint{a, piece.c, cfg.altitude}
                                            : LocalPoint{piece.c, a, cfg.altitude};
        path.waypoints.push_back(make_waypoint(origin, p));
      }
    }
    if (path.waypoints.size() < 2)
      throw PlanEmpty("roi too small: " + path.drone_id + " would get fewer than 2 waypoints");
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace terrapath
