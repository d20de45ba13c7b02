#pragma once

#include <optional>
#include <string>
#include <vector>

#include "terrapath/geo.hpp"

namespace terrapath {

/// Camera orientation at a waypoint. Yaw is clockwise from north in
/// (-180, 180]; pitch is in [-90, 0] with -90 looking straight down.
struct GimbalAngles {
  double yaw_deg = 0.0;
  double pitch_deg = -90.0;

  bool operator==(const GimbalAngles&) const = default;
};

struct Waypoint {
  GeoPoint position;
  LocalPoint local;  // position expressed in the mission origin's frame
  std::optional<GimbalAngles> gimbal;
  bool inserted = false;  // created by densification
  bool capture = true;

  bool operator==(const Waypoint&) const = default;
};

inline Waypoint make_waypoint(const Origin& origin, const GeoPoint& g) {
  return {g, origin.to_local(g), std::nullopt, false, true};
}

inline Waypoint make_waypoint(const Origin& origin, const LocalPoint& p) {
  return {origin.to_wgs84(p), p, std::nullopt, false, true};
}

/// Moves a waypoint to a new local position, keeping the geodetic copy in sync.
inline Waypoint relocate(const Origin& origin, Waypoint wp, const LocalPoint& p) {
  wp.local = p;
  wp.position = origin.to_wgs84(p);
  return wp;
}

struct DronePath {
  std::string drone_id;
  std::vector<Waypoint> waypoints;

  bool operator==(const DronePath&) const = default;
};

}  // namespace terrapath
