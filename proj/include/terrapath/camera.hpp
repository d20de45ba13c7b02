#pragma once

// Gimbal orientation from an expanding downward hemisphere search.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "terrapath/errors.hpp"
#include "terrapath/parallel.hpp"
#include "terrapath/path.hpp"
#include "terrapath/pointcloud.hpp"

namespace terrapath {

struct CameraConfig {
  double r0 = 1.0;
  double dr = 0.5;
  double r_max = 200.0;
  double eps_horizontal = 1e-6;  // below this horizontal offset the view is nadir

  bool operator==(const CameraConfig&) const = default;
};

inline void validate(const CameraConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError(key, "must be finite and > 0");
  };
  positive("r0", c.r0);
  positive("dr", c.dr);
  if (!std::isfinite(c.r_max) || c.r_max < c.r0) throw ConfigError("r_max", "must be >= r0");
  if (!std::isfinite(c.eps_horizontal) || c.eps_horizontal < 0.0)
    throw ConfigError("eps_horizontal", "must be finite and >= 0");
}

struct ViewTarget {
  LocalPoint point;
  double radius = 0.0;  // sphere radius at which the hemisphere first held points
  double mean_z = 0.0;  // mean height of that hemisphere set
  std::size_t candidates = 0;
};

/// Grows r = r0 + k*dr until some cloud point lies in the sphere around the
/// waypoint strictly below it, then picks the point whose height is closest
/// to the mean height of that set. Ties go to the point nearest the
/// waypoint, then to the lexicographically smallest (x, y, z).
inline ViewTarget hemisphere_target(const Waypoint& wp, const SpatialIndex& index,
                                    const CameraConfig& cfg) {
  const LocalPoint& c = wp.local;
  for (std::size_t k = 0;; ++k) {
    const double r = cfg.r0 + static_cast<double>(k) * cfg.dr;
    if (r > cfg.r_max) throw NoTargetFound("no point below waypoint within r_max");
    const PointSet sphere = index.query_sphere(c, r);
    std::vector<LocalPoint> below;
    double sum = 0.0;
    for (const auto& p : sphere.points) {
      if (p.z < c.z) {
        below.push_back(p);
        sum += p.z;
      }
    }
    if (below.empty()) continue;

    const double mean = sum / static_cast<double>(below.size());
    auto key = [&](const LocalPoint& p) {
      const double dx = p.x - c.x;
      const double dy = p.y - c.y;
      const double dz = p.z - c.z;
      return std::make_tuple(std::abs(p.z - mean), dx * dx + dy * dy + dz * dz, p.x, p.y, p.z);
    };
    const LocalPoint* best = &below.front();
    auto best_key = key(*best);
    for (const auto& p : below) {
      auto k2 = key(p);
      if (k2 < best_key) {
        best = &p;
        best_key = k2;
      }
    }
    return {*best, r, mean, below.size()};
  }
}

namespace detail {

inline double normalize_yaw(double deg) {
  while (deg > 180.0) deg -= 360.0;
  while (deg <= -180.0) deg += 360.0;
  return deg == 0.0 ? 0.0 : deg;  // fold -0
}

inline double heading_deg(double dx, double dy) {
  return normalize_yaw(std::atan2(dx, dy) * 180.0 / std::numbers::pi);
}

}  // namespace detail

/// Heading from `from` toward `next`, or 0 if they share a horizontal position.
inline double heading_to(const LocalPoint& from, const std::optional<LocalPoint>& next,
                         double eps) {
  if (!next) return 0.0;
  const double dx = next->x - from.x;
  const double dy = next->y - from.y;
  if (std::hypot(dx, dy) < eps || (dx == 0.0 && dy == 0.0)) return 0.0;
  return detail::heading_deg(dx, dy);
}

/// Clockwise-from-north heading toward the target; when the target is
/// (nearly) straight below, the heading toward the next waypoint instead.
inline double compute_yaw(const Waypoint& wp, const LocalPoint& target, const CameraConfig& cfg,
                          const std::optional<LocalPoint>& next = std::nullopt) {
  const double dx = target.x - wp.local.x;
  const double dy = target.y - wp.local.y;
  if (std::hypot(dx, dy) < cfg.eps_horizontal) return heading_to(wp.local, next, cfg.eps_horizontal);
  return detail::heading_deg(dx, dy);
}

/// Downward tilt toward a target below the waypoint, in [-90, 0).
inline double compute_pitch(const Waypoint& wp, const LocalPoint& target) {
  const double dx = target.x - wp.local.x;
  const double dy = target.y - wp.local.y;
  const double drop = wp.local.z - target.z;
  if (!(drop > 0.0)) throw InputError("view target must lie below the waypoint");
  return -std::atan2(drop, std::hypot(dx, dy)) * 180.0 / std::numbers::pi;
}

struct AngleWarning {
  std::string drone_id;
  std::size_t waypoint = 0;
  std::string message;
};

struct AnnotatedPaths {
  std::vector<DronePath> paths;
  std::vector<AngleWarning> warnings;  // waypoints that fell back to nadir
};

/// Attaches gimbal angles to every waypoint. Waypoints with no target in
/// reach get a nadir view and an entry in `warnings`.
inline AnnotatedPaths annotate_angles(const std::vector<DronePath>& paths,
                                      const SpatialIndex& index, const CameraConfig& cfg,
                                      unsigned threads = 1) {
  struct Slot {
    std::size_t path;
    std::size_t wp;
  };
  std::vector<Slot> slots;
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t w = 0; w < paths[p].waypoints.size(); ++w) slots.push_back({p, w});

  AnnotatedPaths out{paths, {}};
  std::vector<std::optional<std::string>> failures(slots.size());
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const auto [p, w] = slots[i];
    const auto& wps = paths[p].waypoints;
    const Waypoint& wp = wps[w];
    std::optional<LocalPoint> next;
    if (w + 1 < wps.size()) next = wps[w + 1].local;
    GimbalAngles angles;
    try {
      const ViewTarget t = hemisphere_target(wp, index, cfg);
      angles = {compute_yaw(wp, t.point, cfg, next), compute_pitch(wp, t.point)};
    } catch (const NoTargetFound& e) {
      angles = {heading_to(wp.local, next, cfg.eps_horizontal), -90.0};
      failures[i] = e.what();
    }
    out.paths[p].waypoints[w].gimbal = angles;
  });
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (failures[i]) out.warnings.push_back({paths[slots[i].path].drone_id, slots[i].wp, *failures[i]});
  return out;
}

}  // namespace terrapath
