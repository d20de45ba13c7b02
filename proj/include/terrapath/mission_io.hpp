#pragma once

// JSON interchange: path/mission documents (schema version "1") and the
// tool configuration file.
//
// Mission document:
//   {
//     "version": "1",
//     "frame": "WGS84",
//     "origin": {"lat": .., "lon": .., "alt": ..},          (optional on input)
//     "drones": [
//       {"id": "drone1",
//        "waypoints": [{"lat": .., "lon": .., "alt_m": ..,
//                       "yaw_deg": ..,  "gimbal_pitch_deg": ..,  (optional, paired)
//                       "capture": true, "inserted": false}, ...]}
//     ]
//   }

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "terrapath/camera.hpp"
#include "terrapath/errors.hpp"
#include "terrapath/geo.hpp"
#include "terrapath/path.hpp"
#include "terrapath/planner.hpp"
#include "terrapath/refine.hpp"

namespace terrapath {

inline constexpr std::string_view kMissionVersion = "1";

struct MissionPaths {
  Origin origin;
  bool origin_given = false;  // false when taken from the first waypoint
  std::vector<DronePath> paths;
};

namespace detail {

using json = nlohmann::json;

inline std::string child(const std::string& path, std::string_view key) {
  return path + "/" + std::string(key);
}

inline std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

inline const json& require(const json& obj, const std::string& path, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(path, key), "required field missing");
  return *it;
}

inline double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path, "number is not finite");
  return d;
}

inline bool bool_at(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw SchemaError(path, "expected a boolean");
  return v.get<bool>();
}

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<std::string_view> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) throw SchemaError(child(path, it.key()), "unknown field");
  }
}

inline GeoPoint geo_at(const json& obj, const std::string& path, std::string_view alt_key) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  GeoPoint g;
  g.lat = number_at(require(obj, path, "lat"), child(path, "lat"));
  g.lon = number_at(require(obj, path, "lon"), child(path, "lon"));
  g.alt = number_at(require(obj, path, alt_key), child(path, alt_key));
  if (g.lat < -90.0 || g.lat > 90.0) throw SchemaError(child(path, "lat"), "out of range");
  if (g.lon <= -180.0 || g.lon > 180.0) throw SchemaError(child(path, "lon"), "out of range");
  return g;
}

/// Shortest round-trip text for v, padded with zeros to at least
/// `min_decimals` fraction digits and `min_significant` significant digits.
/// Padding never changes the value, so output always parses back exactly.
inline std::string format_number(double v, int min_decimals, int min_significant) {
  char buf[512];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  std::string s(buf, end);
  const auto dot = s.find('.');
  int decimals = dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
  int significant = 0;
  bool leading = true;
  for (char c : s) {
    if (c < '0' || c > '9') continue;
    if (leading && c == '0') continue;
    leading = false;
    ++significant;
  }
  if (significant == 0) significant = 1;  // plain zero
  const int want = std::max(min_decimals - decimals, min_significant - significant);
  if (want > 0) {
    if (dot == std::string::npos) s.push_back('.');
    s.append(static_cast<std::size_t>(want), '0');
  }
  return s;
}

inline std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

// Meters and angles: at least 3 decimals. Latitude/longitude: at least 9
// significant digits.
inline std::string measure(double v) { return format_number(v, 3, 0); }
inline std::string coordinate(double v) { return format_number(v, 0, 9); }

}  // namespace detail

/// Parses a path or mission document. Missing origin: the first waypoint
/// of the first drone becomes the origin.
inline MissionPaths read_paths(const nlohmann::json& doc) {
  using detail::child;
  const std::string root;
  if (!doc.is_object()) throw SchemaError("/", "document must be an object");
  detail::reject_unknown(doc, root, {"version", "frame", "origin", "drones"});
  const auto& version = detail::require(doc, root, "version");
  if (!version.is_string() || version.get<std::string>() != kMissionVersion)
    throw SchemaError("/version", "unsupported version (expected \"1\")");
  if (auto it = doc.find("frame"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>() != "WGS84")
      throw SchemaError("/frame", "frame must be \"WGS84\"");
  }

  MissionPaths out;
  std::optional<GeoPoint> anchor;
  if (auto it = doc.find("origin"); it != doc.end()) {
    detail::reject_unknown(*it, "/origin", {"lat", "lon", "alt"});
    anchor = detail::geo_at(*it, "/origin", "alt");
    if (std::abs(anchor->lat) >= 90.0) throw SchemaError("/origin/lat", "origin cannot be a pole");
  }

  const auto& drones = detail::require(doc, root, "drones");
  if (!drones.is_array() || drones.empty())
    throw SchemaError("/drones", "expected a non-empty array");

  struct RawWaypoint {
    GeoPoint g;
    std::optional<GimbalAngles> gimbal;
    bool capture;
    bool inserted;
  };
  std::vector<std::pair<std::string, std::vector<RawWaypoint>>> raw;
  for (std::size_t d = 0; d < drones.size(); ++d) {
    const std::string dpath = child("/drones", d);
    const auto& drone = drones[d];
    if (!drone.is_object()) throw SchemaError(dpath, "expected an object");
    detail::reject_unknown(drone, dpath, {"id", "waypoints"});
    const auto& id = detail::require(drone, dpath, "id");
    std::string drone_id;
    if (id.is_string()) {
      drone_id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      drone_id = std::to_string(id.get<long long>());
    } else {
      throw SchemaError(child(dpath, "id"), "expected a string or integer");
    }
    const auto& wps = detail::require(drone, dpath, "waypoints");
    const std::string wpath = child(dpath, "waypoints");
    if (!wps.is_array()) throw SchemaError(wpath, "expected an array");
    if (wps.size() < 2) throw SchemaError(wpath, "a drone needs at least 2 waypoints");
    std::vector<RawWaypoint> list;
    for (std::size_t w = 0; w < wps.size(); ++w) {
      const std::string path = child(wpath, w);
      const auto& obj = wps[w];
      if (!obj.is_object()) throw SchemaError(path, "expected an object");
      detail::reject_unknown(
          obj, path, {"lat", "lon", "alt_m", "yaw_deg", "gimbal_pitch_deg", "capture", "inserted"});
      RawWaypoint rw{detail::geo_at(obj, path, "alt_m"), std::nullopt, true, false};
      const bool has_yaw = obj.contains("yaw_deg");
      const bool has_pitch = obj.contains("gimbal_pitch_deg");
      if (has_yaw != has_pitch)
        throw SchemaError(child(path, has_yaw ? "gimbal_pitch_deg" : "yaw_deg"),
                          "yaw_deg and gimbal_pitch_deg must appear together");
      if (has_yaw) {
        GimbalAngles a;
        a.yaw_deg = detail::number_at(obj["yaw_deg"], child(path, "yaw_deg"));
        a.pitch_deg = detail::number_at(obj["gimbal_pitch_deg"], child(path, "gimbal_pitch_deg"));
        if (a.yaw_deg <= -180.0 || a.yaw_deg > 180.0)
          throw SchemaError(child(path, "yaw_deg"), "must be in (-180, 180]");
        if (a.pitch_deg < -90.0 || a.pitch_deg > 0.0)
          throw SchemaError(child(path, "gimbal_pitch_deg"), "must be in [-90, 0]");
        rw.gimbal = a;
      }
      if (obj.contains("capture")) rw.capture = detail::bool_at(obj["capture"], child(path, "capture"));
      if (obj.contains("inserted"))
        rw.inserted = detail::bool_at(obj["inserted"], child(path, "inserted"));
      list.push_back(rw);
    }
    raw.emplace_back(std::move(drone_id), std::move(list));
  }

  out.origin_given = anchor.has_value();
  if (!anchor) {
    anchor = raw.front().second.front().g;
    if (std::abs(anchor->lat) >= 90.0)
      throw SchemaError("/drones/0/waypoints/0/lat", "origin cannot be a pole");
  }
  out.origin = Origin(*anchor);
  for (auto& [id, list] : raw) {
    DronePath path{id, {}};
    for (const auto& rw : list) {
      Waypoint wp = make_waypoint(out.origin, rw.g);
      wp.gimbal = rw.gimbal;
      wp.capture = rw.capture;
      wp.inserted = rw.inserted;
      path.waypoints.push_back(wp);
    }
    out.paths.push_back(std::move(path));
  }
  return out;
}

inline MissionPaths read_paths(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
  return read_paths(doc);
}

/// Serializes a mission with a fixed key order and number formatting, so
/// equal input always gives identical bytes.
inline std::string write_mission(const Origin& origin, const std::vector<DronePath>& paths) {
  using detail::coordinate;
  using detail::measure;
  const GeoPoint& o = origin.anchor();
  std::string s;
  s += "{\n  \"version\": " + detail::quote(kMissionVersion) + ",\n";
  s += "  \"frame\": \"WGS84\",\n";
  s += "  \"origin\": {\"lat\": " + coordinate(o.lat) + ", \"lon\": " + coordinate(o.lon) +
       ", \"alt\": " + measure(o.alt) + "},\n";
  s += "  \"drones\": [";
  for (std::size_t d = 0; d < paths.size(); ++d) {
    s += d == 0 ? "\n" : ",\n";
    s += "    {\n      \"id\": " + detail::quote(paths[d].drone_id) + ",\n      \"waypoints\": [";
    const auto& wps = paths[d].waypoints;
    for (std::size_t w = 0; w < wps.size(); ++w) {
      const Waypoint& wp = wps[w];
      s += w == 0 ? "\n" : ",\n";
      s += "        {\"lat\": " + coordinate(wp.position.lat) + ", \"lon\": " +
           coordinate(wp.position.lon) + ", \"alt_m\": " + measure(wp.position.alt);
      if (wp.gimbal) {
        s += ", \"yaw_deg\": " + measure(wp.gimbal->yaw_deg) +
             ", \"gimbal_pitch_deg\": " + measure(wp.gimbal->pitch_deg);
      }
      s += std::string(", \"capture\": ") + (wp.capture ? "true" : "false");
      s += std::string(", \"inserted\": ") + (wp.inserted ? "true" : "false") + "}";
    }
    s += "\n      ]\n    }";
  }
  s += "\n  ]\n}\n";
  return s;
}

// ---------------------------------------------------------------------------
// Configuration

struct MissionConfig {
  RefineConfig refine;
  CameraConfig camera;
  PlanConfig plan;
  CameraModel camera_model;
  std::optional<GeoPoint> origin;

  bool operator==(const MissionConfig&) const = default;
};

namespace detail {

inline double config_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

inline int config_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  const auto i = v.get<long long>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
    throw ConfigError(key, "out of range");
  return static_cast<int>(i);
}

}  // namespace detail

/// Every key is optional except z_offset; unknown keys are rejected.
inline MissionConfig read_config(const nlohmann::json& doc) {
  using detail::config_number;
  if (!doc.is_object()) throw ConfigError("(root)", "configuration must be a JSON object");
  MissionConfig c;
  bool have_z_offset = false;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "tol0") c.refine.tol0 = config_number(v, k);
    else if (k == "dtol") c.refine.dtol = config_number(v, k);
    else if (k == "tol_max") c.refine.tol_max = config_number(v, k);
    else if (k == "z_offset") { c.refine.z_offset = config_number(v, k); have_z_offset = true; }
    else if (k == "x_offset") c.refine.x_offset = config_number(v, k);
    else if (k == "step") c.refine.step = config_number(v, k);
    else if (k == "delta_z") c.refine.delta_z = config_number(v, k);
    else if (k == "standoff_band") c.refine.standoff_band = config_number(v, k);
    else if (k == "capture_on_inserted") {
      if (!v.is_boolean()) throw ConfigError(k, "expected a boolean");
      c.refine.capture_on_inserted = v.get<bool>();
    }
    else if (k == "r0") c.camera.r0 = config_number(v, k);
    else if (k == "dr") c.camera.dr = config_number(v, k);
    else if (k == "r_max") c.camera.r_max = config_number(v, k);
    else if (k == "eps_horizontal") c.camera.eps_horizontal = config_number(v, k);
    else if (k == "altitude") c.plan.altitude = config_number(v, k);
    else if (k == "sidelap") c.plan.sidelap = config_number(v, k);
    else if (k == "frontlap") c.plan.frontlap = config_number(v, k);
    else if (k == "n_drones") c.plan.n_drones = detail::config_int(v, k);
    else if (k == "hfov_deg") c.camera_model.hfov_deg = config_number(v, k);
    else if (k == "vfov_deg") c.camera_model.vfov_deg = config_number(v, k);
    else if (k == "image_width_px") c.camera_model.image_width_px = detail::config_int(v, k);
    else if (k == "image_height_px") c.camera_model.image_height_px = detail::config_int(v, k);
    else if (k == "origin") {
      if (!v.is_object()) throw ConfigError(k, "expected an object with lat, lon, alt");
      GeoPoint g;
      for (auto o = v.begin(); o != v.end(); ++o) {
        const std::string key = "origin." + o.key();
        if (o.key() == "lat") g.lat = config_number(o.value(), key);
        else if (o.key() == "lon") g.lon = config_number(o.value(), key);
        else if (o.key() == "alt") g.alt = config_number(o.value(), key);
        else throw ConfigError(key, "unknown key");
      }
      for (const char* need : {"lat", "lon"})
        if (!v.contains(need)) throw ConfigError(std::string("origin.") + need, "missing");
      if (g.lat <= -90.0 || g.lat >= 90.0) throw ConfigError("origin.lat", "out of range");
      if (g.lon <= -180.0 || g.lon > 180.0) throw ConfigError("origin.lon", "out of range");
      c.origin = g;
    }
    else if (k == "roi") {
      if (!v.is_array()) throw ConfigError(k, "expected an array of [x, y] pairs");
      c.plan.roi.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string key = "roi[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2) throw ConfigError(key, "expected [x, y]");
        c.plan.roi.push_back({config_number(v[i][0], key), config_number(v[i][1], key), 0.0});
      }
    }
    else throw ConfigError(k, "unknown key");
  }
  if (!have_z_offset) throw ConfigError("z_offset", "required key missing");
  validate(c.refine);
  validate(c.camera);
  validate(c.camera_model);
  if (!(c.plan.altitude > 0.0)) throw ConfigError("altitude", "must be > 0");
  if (!(c.plan.sidelap >= 0.0 && c.plan.sidelap < 1.0)) throw ConfigError("sidelap", "must be in [0, 1)");
  if (!(c.plan.frontlap >= 0.0 && c.plan.frontlap < 1.0))
    throw ConfigError("frontlap", "must be in [0, 1)");
  if (c.plan.n_drones < 1) throw ConfigError("n_drones", "must be >= 1");
  if (!c.plan.roi.empty()) validate_roi(c.plan.roi);
  return c;
}

inline MissionConfig read_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
  }
  return read_config(doc);
}

/// Fully resolved configuration, defaults included. read_config of the
/// result reproduces `c`.
inline nlohmann::ordered_json config_to_json(const MissionConfig& c) {
  nlohmann::ordered_json j;
  j["tol0"] = c.refine.tol0;
  j["dtol"] = c.refine.dtol;
  j["tol_max"] = c.refine.tol_max;
  j["z_offset"] = c.refine.z_offset;
  j["x_offset"] = c.refine.x_offset;
  j["step"] = c.refine.step;
  j["delta_z"] = c.refine.delta_z;
  j["standoff_band"] = c.refine.standoff_band;
  j["capture_on_inserted"] = c.refine.capture_on_inserted;
  j["r0"] = c.camera.r0;
  j["dr"] = c.camera.dr;
  j["r_max"] = c.camera.r_max;
  j["eps_horizontal"] = c.camera.eps_horizontal;
  j["altitude"] = c.plan.altitude;
  j["sidelap"] = c.plan.sidelap;
  j["frontlap"] = c.plan.frontlap;
  j["n_drones"] = c.plan.n_drones;
  j["hfov_deg"] = c.camera_model.hfov_deg;
  j["vfov_deg"] = c.camera_model.vfov_deg;
  j["image_width_px"] = c.camera_model.image_width_px;
  j["image_height_px"] = c.camera_model.image_height_px;
  if (c.origin) j["origin"] = {{"lat", c.origin->lat}, {"lon", c.origin->lon}, {"alt", c.origin->alt}};
  if (!c.plan.roi.empty()) {
    auto roi = nlohmann::ordered_json::array();
    for (const auto& p : c.plan.roi) roi.push_back({p.x, p.y});
    j["roi"] = roi;
  }
  return j;
}

}  // namespace terrapath
