#pragma once

// Subcommand bodies behind the terrapath executable. Each returns an exit
// code instead of throwing, writes artifacts atomically and reports
// human-readable progress and errors to `log`.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "terrapath/camera.hpp"
#include "terrapath/cloud_io.hpp"
#include "terrapath/errors.hpp"
#include "terrapath/eval.hpp"
#include "terrapath/mission_io.hpp"
#include "terrapath/planner.hpp"
#include "terrapath/refine.hpp"
#include "terrapath/scene.hpp"

namespace terrapath {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitRuntime = 2;

struct CommandOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> warnings;
  std::string error;  // empty iff exit_code == 0
};

/// Explicit path wins; otherwise the MISSION_CONFIG environment variable.
inline std::filesystem::path resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("MISSION_CONFIG"); env && *env) return env;
  throw InputError("no configuration file: pass --config or set MISSION_CONFIG");
}

inline MissionConfig load_config(const std::filesystem::path& path) {
  return read_config(std::string_view(read_file(path)));
}

namespace detail {

template <typename Body>
CommandOutcome run_command(std::ostream& log, Body&& body) {
  CommandOutcome out;
  auto fail = [&](int code, const std::string& msg) {
    out.exit_code = code;
    out.error = msg;
    log << "error: " << msg << "\n";
  };
  try {
    body(out);
  } catch (const NoTerrainFound& e) {
    fail(kExitRuntime, std::string(e.what()) + " [local x=" + std::to_string(e.x()) +
                           " y=" + std::to_string(e.y()) + "]");
  } catch (const PlanEmpty& e) {
    fail(kExitInput, e.what());
  } catch (const InputError& e) {
    fail(kExitInput, e.what());
  } catch (const std::exception& e) {
    fail(kExitRuntime, e.what());
  }
  for (const auto& w : out.warnings) log << "warning: " << w << "\n";
  return out;
}

}  // namespace detail

inline CommandOutcome cmd_plan(const std::filesystem::path& config_path,
                               const std::filesystem::path& output, std::ostream& log) {
  return detail::run_command(log, [&](CommandOutcome&) {
    const MissionConfig cfg = load_config(config_path);
    if (!cfg.origin) throw ConfigError("origin", "required by plan");
    if (cfg.plan.roi.empty()) throw ConfigError("roi", "required by plan");
    const Origin origin(*cfg.origin);
    const auto paths = boustrophedon(cfg.plan, cfg.camera_model, origin);
    write_file_atomic(output, write_mission(origin, paths));
    std::size_t n = 0;
    for (const auto& p : paths) n += p.waypoints.size();
    log << "plan: " << paths.size() << " drones, " << n << " waypoints -> " << output.string()
        << "\n";
  });
}

/// Terrain-follow, densify, stand off and orient every path, then write the
/// mission. Output bytes do not depend on `threads`.
inline std::string refine_mission(const MissionPaths& input, const PointCloud& cloud,
                                  const MissionConfig& cfg, unsigned threads,
                                  std::vector<std::string>* warnings = nullptr) {
  const Origin origin = cfg.origin ? Origin(*cfg.origin) : input.origin;
  const SpatialIndex index(cloud);
  std::vector<DronePath> refined;
  for (const auto& path : input.paths) {
    DronePath local{path.drone_id, {}};
    for (const auto& wp : path.waypoints) {
      Waypoint w = make_waypoint(origin, wp.position);
      w.capture = wp.capture;
      w.inserted = wp.inserted;
      local.waypoints.push_back(w);
    }
    refined.push_back(refine_path(local, index, cfg.refine, origin, threads));
  }
  AnnotatedPaths annotated = annotate_angles(refined, index, cfg.camera, threads);
  if (warnings) {
    for (const auto& w : annotated.warnings)
      warnings->push_back("drone '" + w.drone_id + "' waypoint " + std::to_string(w.waypoint) +
                          ": " + w.message + "; using nadir");
  }
  return write_mission(origin, annotated.paths);
}

inline CommandOutcome cmd_refine(const std::filesystem::path& paths_path,
                                 const std::filesystem::path& cloud_path,
                                 const std::filesystem::path& config_path,
                                 const std::filesystem::path& output, unsigned threads,
                                 std::ostream& log) {
  return detail::run_command(log, [&](CommandOutcome& out) {
    const MissionConfig cfg = load_config(config_path);
    const MissionPaths input = read_paths(std::string_view(read_file(paths_path)));
    const PointCloud cloud = load_cloud(cloud_path);
    log << "refine: " << input.paths.size() << " drones against " << cloud.size()
        << " points\n";
    const std::string doc = refine_mission(input, cloud, cfg, threads, &out.warnings);
    write_file_atomic(output, doc);
    log << "refine: wrote " << output.string() << "\n";
  });
}

/// Prints the metrics table to `log`; writes the JSON report to `json_output`
/// when given, else to `out`.
inline CommandOutcome cmd_eval(const std::filesystem::path& reconstructed,
                               const std::filesystem::path& truth,
                               const std::vector<double>& thresholds,
                               const std::optional<std::filesystem::path>& json_output,
                               unsigned threads, std::ostream& out, std::ostream& log,
                               const std::string& label = "reconstruction") {
  return detail::run_command(log, [&](CommandOutcome&) {
    const PointCloud recon = load_cloud(reconstructed);
    const PointCloud ref = load_cloud(truth);
    const auto report = coverage_metrics(recon, ref, thresholds, threads, label);
    const std::string doc = report_to_json({report}).dump(2) + "\n";
    if (json_output) write_file_atomic(*json_output, doc);
    else out << doc;
    log << report_table({report});
  });
}

inline CommandOutcome cmd_scene(const SceneSpec& spec, const std::filesystem::path& output,
                                bool ascii, std::ostream& log) {
  return detail::run_command(log, [&](CommandOutcome&) {
    const PointCloud cloud = generate_scene(spec);
    write_file_atomic(output, ascii ? encode_ply_ascii(cloud) : encode_ply_binary(cloud));
    log << "scene: " << cloud.size() << " points -> " << output.string() << "\n";
  });
}

/// Prints the fully resolved configuration (defaults filled in) to `out`.
inline CommandOutcome cmd_config_show(const std::filesystem::path& config_path, std::ostream& out,
                                      std::ostream& log) {
  return detail::run_command(log, [&](CommandOutcome&) {
    out << config_to_json(load_config(config_path)).dump(2) << "\n";
  });
}

}  // namespace terrapath
