#pragma once

// Geodetic <-> local East-North-Up conversion.
//
// Equirectangular tangent-plane approximation about a fixed mission origin,
// using the WGS84 semi-major axis as a spherical radius. Sub-centimeter
// accurate over a few hundred meters; callers should flag points farther
// than kValidityRadius from the origin.

#include <cmath>
#include <numbers>
#include <string>

#include "terrapath/errors.hpp"

namespace terrapath {

inline constexpr double kEarthRadius = 6378137.0;
inline constexpr double kValidityRadius = 10000.0;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, (-180, 180]
  double alt = 0.0;  // meters above the origin datum

  bool operator==(const GeoPoint&) const = default;
};

struct LocalPoint {
  double x = 0.0;  // east
  double y = 0.0;  // north
  double z = 0.0;  // up

  bool operator==(const LocalPoint&) const = default;
};

inline void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || p.lat < -90.0 || p.lat > 90.0)
    throw InputError("latitude out of range: " + std::to_string(p.lat));
  if (!std::isfinite(p.lon) || p.lon <= -180.0 || p.lon > 180.0)
    throw InputError("longitude out of range: " + std::to_string(p.lon));
  if (!std::isfinite(p.alt))
    throw InputError("altitude is not finite");
}

/// Anchor of a mission's local frame. All conversions within one mission
/// must go through the same Origin.
class Origin {
 public:
  Origin() = default;

  explicit Origin(const GeoPoint& anchor) : anchor_(anchor) {
    validate(anchor);
    if (std::abs(anchor.lat) >= 90.0)
      throw InputError("origin latitude must be strictly inside (-90, 90)");
    meters_per_deg_lat_ = kEarthRadius * std::numbers::pi / 180.0;
    meters_per_deg_lon_ =
        meters_per_deg_lat_ * std::cos(anchor.lat * std::numbers::pi / 180.0);
  }

  const GeoPoint& anchor() const noexcept { return anchor_; }

  LocalPoint to_local(const GeoPoint& p) const {
    validate(p);
    double dlon = p.lon - anchor_.lon;
    if (dlon > 180.0) dlon -= 360.0;
    if (dlon <= -180.0) dlon += 360.0;
    return {dlon * meters_per_deg_lon_, (p.lat - anchor_.lat) * meters_per_deg_lat_,
            p.alt - anchor_.alt};
  }

  GeoPoint to_wgs84(const LocalPoint& p) const {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw InputError("local point is not finite");
    GeoPoint g{anchor_.lat + p.y / meters_per_deg_lat_,
               anchor_.lon + p.x / meters_per_deg_lon_, anchor_.alt + p.z};
    if (g.lon > 180.0) g.lon -= 360.0;
    if (g.lon <= -180.0) g.lon += 360.0;
    if (g.lat < -90.0 || g.lat > 90.0)
      throw InputError("local point maps outside the valid latitude range");
    return g;
  }

  bool operator==(const Origin& o) const { return anchor_ == o.anchor_; }

 private:
  GeoPoint anchor_{};
  double meters_per_deg_lat_ = kEarthRadius * std::numbers::pi / 180.0;
  double meters_per_deg_lon_ = kEarthRadius * std::numbers::pi / 180.0;
};

inline LocalPoint to_local(const Origin& origin, const GeoPoint& p) {
  return origin.to_local(p);
}

inline GeoPoint to_wgs84(const Origin& origin, const LocalPoint& p) {
  return origin.to_wgs84(p);
}

/// True when the point is far enough from the origin that the tangent-plane
/// approximation should not be trusted.
inline bool outside_validity(const LocalPoint& p) {
  return std::hypot(p.x, p.y) > kValidityRadius;
}

}  // namespace terrapath
