#pragma once

// Terrain-following refinement of fixed-altitude paths.
//
// Each waypoint is lifted to the mean height of the cloud column beneath it
// plus z_offset. The column is the first non-empty horizontal disk found by
// growing the search tolerance tol0, tol0 + dtol, tol0 + 2*dtol, ... up to
// tol_max. Densification then walks each segment and inserts waypoints
// wherever the terrain-following altitude drifts more than delta_z away from
// the last emitted waypoint.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "terrapath/errors.hpp"
#include "terrapath/geo.hpp"
#include "terrapath/parallel.hpp"
#include "terrapath/path.hpp"
#include "terrapath/pointcloud.hpp"

namespace terrapath {

struct RefineConfig {
  double tol0 = 0.5;
  double dtol = 0.5;
  double tol_max = 50.0;
  double z_offset = 0.0;  // required from configuration files
  double x_offset = 0.0;
  double step = 1.0;
  double delta_z = 2.0;
  double standoff_band = 2.0;
  bool capture_on_inserted = true;

  bool operator==(const RefineConfig&) const = default;
};

inline void validate(const RefineConfig& c) {
  auto finite = [](const char* key, double v) {
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  };
  auto positive = [&](const char* key, double v) {
    finite(key, v);
    if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
  };
  auto non_negative = [&](const char* key, double v) {
    finite(key, v);
    if (v < 0.0) throw ConfigError(key, "must be >= 0");
  };
  positive("tol0", c.tol0);
  positive("dtol", c.dtol);
  finite("tol_max", c.tol_max);
  if (c.tol_max < c.tol0) throw ConfigError("tol_max", "must be >= tol0");
  non_negative("z_offset", c.z_offset);
  non_negative("x_offset", c.x_offset);
  positive("step", c.step);
  positive("delta_z", c.delta_z);
  non_negative("standoff_band", c.standoff_band);
}

/// The terrain column found beneath a horizontal position.
struct TerrainColumn {
  double tol = 0.0;        // tolerance that first produced a non-empty disk
  std::size_t expansions = 0;
  PointSet points;
  double mean_z = 0.0;
};

inline TerrainColumn terrain_column(const SpatialIndex& index, double x, double y,
                                    const RefineConfig& cfg) {
  for (std::size_t k = 0;; ++k) {
    const double tol = cfg.tol0 + static_cast<double>(k) * cfg.dtol;
    if (tol > cfg.tol_max) {
      throw NoTerrainFound("no terrain within tol_max=" + std::to_string(cfg.tol_max) +
                               " of (" + std::to_string(x) + ", " + std::to_string(y) + ")",
                           x, y);
    }
    PointSet found = index.query_disk_xy(x, y, tol);
    if (found.empty()) continue;
    double sum = 0.0;
    for (const auto& p : found.points) sum += p.z;
    TerrainColumn col{tol, k, std::move(found), 0.0};
    col.mean_z = sum / static_cast<double>(col.points.size());
    return col;
  }
}

inline double terrain_altitude(const SpatialIndex& index, double x, double y,
                               const RefineConfig& cfg) {
  return terrain_column(index, x, y, cfg).mean_z + cfg.z_offset;
}

inline Waypoint adjust_altitude(const Waypoint& wp, const SpatialIndex& index,
                                const RefineConfig& cfg, const Origin& origin) {
  const double z = terrain_altitude(index, wp.local.x, wp.local.y, cfg);
  return relocate(origin, wp, {wp.local.x, wp.local.y, z});
}

namespace detail {

[[noreturn]] inline void rethrow_at(const NoTerrainFound& e, const std::string& drone,
                                    std::size_t i) {
  throw NoTerrainFound("drone '" + drone + "' waypoint " + std::to_string(i) + ": " + e.what(),
                       e.x(), e.y());
}

}  // namespace detail

/// Adjusts every waypoint independently; order and count are preserved.
inline DronePath adjust_path(const DronePath& path, const SpatialIndex& index,
                             const RefineConfig& cfg, const Origin& origin,
                             unsigned threads = 1) {
  if (path.waypoints.empty()) throw InputError("path '" + path.drone_id + "' has no waypoints");
  DronePath out{path.drone_id, std::vector<Waypoint>(path.waypoints.size())};
  parallel_for(path.waypoints.size(), threads, [&](std::size_t i) {
    try {
      out.waypoints[i] = adjust_altitude(path.waypoints[i], index, cfg, origin);
    } catch (const NoTerrainFound& e) {
      detail::rethrow_at(e, path.drone_id, i);
    }
  });
  return out;
}

/// Inserts waypoints along each segment of an already adjusted path. Samples
/// sit every `step` meters along the horizontal segment (endpoints excluded);
/// a sample becomes a waypoint when its terrain-following altitude differs
/// from the most recently emitted waypoint by more than delta_z.
inline DronePath densify(const DronePath& path, const SpatialIndex& index,
                         const RefineConfig& cfg, const Origin& origin, unsigned threads = 1) {
  DronePath out{path.drone_id, {}};
  const auto& wps = path.waypoints;
  if (wps.empty()) return out;

  struct Sample {
    std::size_t segment;
    double x;
    double y;
    double z;
  };
  std::vector<Sample> samples;
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    const LocalPoint& a = wps[i].local;
    const LocalPoint& b = wps[i + 1].local;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double length = std::hypot(dx, dy);
    for (std::size_t k = 1;; ++k) {
      const double s = static_cast<double>(k) * cfg.step;
      if (!(s < length)) break;
      const double t = s / length;
      samples.push_back({i, a.x + t * dx, a.y + t * dy, 0.0});
    }
  }
  // Altitudes are independent per sample; only the insertion rule is sequential.
  parallel_for(samples.size(), threads, [&](std::size_t j) {
    try {
      samples[j].z = terrain_altitude(index, samples[j].x, samples[j].y, cfg);
    } catch (const NoTerrainFound& e) {
      detail::rethrow_at(e, path.drone_id, samples[j].segment);
    }
  });

  out.waypoints.reserve(wps.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    out.waypoints.push_back(wps[i]);
    double last_alt = wps[i].local.z;
    for (; j < samples.size() && samples[j].segment == i; ++j) {
      const Sample& s = samples[j];
      if (std::abs(s.z - last_alt) > cfg.delta_z) {
        Waypoint w = make_waypoint(origin, LocalPoint{s.x, s.y, s.z});
        w.inserted = true;
        w.capture = cfg.capture_on_inserted;
        out.waypoints.push_back(w);
        last_alt = s.z;
      }
    }
  }
  out.waypoints.push_back(wps.back());
  return out;
}

/// Cloud points within x_offset horizontally and standoff_band vertically.
inline PointSet standoff_violations(const SpatialIndex& index, const LocalPoint& at,
                                    const RefineConfig& cfg) {
  PointSet near = index.query_disk_xy(at.x, at.y, cfg.x_offset);
  PointSet out;
  for (std::size_t i = 0; i < near.size(); ++i) {
    if (std::abs(near.points[i].z - at.z) <= cfg.standoff_band) {
      out.indices.push_back(near.indices[i]);
      out.points.push_back(near.points[i]);
    }
  }
  return out;
}

/// Pushes a waypoint horizontally away from structures at its own height.
/// Each iteration moves dtol along the direction from the centroid of the
/// offending points toward the waypoint. After a move the altitude is raised
/// if needed so it never drops below the terrain-following altitude of the
/// new column. Fails after ceil(2 * x_offset / dtol) moves.
inline Waypoint lateral_standoff(const Waypoint& wp, const SpatialIndex& index,
                                 const RefineConfig& cfg, const Origin& origin) {
  if (cfg.x_offset <= 0.0) return wp;
  LocalPoint at = wp.local;
  const auto max_moves = static_cast<std::size_t>(std::ceil(2.0 * cfg.x_offset / cfg.dtol));
  for (std::size_t move = 0;; ++move) {
    const PointSet bad = standoff_violations(index, at, cfg);
    if (bad.empty()) return move == 0 ? wp : relocate(origin, wp, at);
    if (move == max_moves) break;
    double cx = 0.0;
    double cy = 0.0;
    for (const auto& p : bad.points) {
      cx += p.x;
      cy += p.y;
    }
    cx /= static_cast<double>(bad.size());
    cy /= static_cast<double>(bad.size());
    const double ux = at.x - cx;
    const double uy = at.y - cy;
    const double norm = std::hypot(ux, uy);
    if (norm < 1e-12) break;  // surrounded symmetrically: no escape direction
    at.x += cfg.dtol * ux / norm;
    at.y += cfg.dtol * uy / norm;
    try {
      at.z = std::max(at.z, terrain_altitude(index, at.x, at.y, cfg));
    } catch (const NoTerrainFound&) {
      // no terrain under the new position: keep the current altitude
    }
  }
  throw StandoffUnresolved("cannot clear x_offset=" + std::to_string(cfg.x_offset) +
                           " around (" + std::to_string(wp.local.x) + ", " +
                           std::to_string(wp.local.y) + ", " + std::to_string(wp.local.z) + ")");
}

/// adjust_path, then densify, then lateral standoff on every waypoint.
inline DronePath refine_path(const DronePath& path, const SpatialIndex& index,
                             const RefineConfig& cfg, const Origin& origin,
                             unsigned threads = 1) {
  DronePath out =
      densify(adjust_path(path, index, cfg, origin, threads), index, cfg, origin, threads);
  if (cfg.x_offset > 0.0) {
    parallel_for(out.waypoints.size(), threads, [&](std::size_t i) {
      try {
        out.waypoints[i] = lateral_standoff(out.waypoints[i], index, cfg, origin);
      } catch (const StandoffUnresolved& e) {
        throw StandoffUnresolved("drone '" + path.drone_id + "' waypoint " + std::to_string(i) +
                                 ": " + e.what());
      }
    });
  }
  return out;
}

}  // namespace terrapath
