#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "terrapath/commands.hpp"

using namespace terrapath;
namespace fs = std::filesystem;

namespace {

const GeoPoint kAnchor{45.5, -73.6, 20.0};

fs::path dir() {
  static const fs::path d = [] {
    const auto p = fs::temp_directory_path() / "terrapath_commands_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

fs::path put(const std::string& name, const std::string& body) {
  const auto p = dir() / name;
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

const char* kPlanConfig = R"({
  "z_offset": 10,
  "altitude": 30,
  "n_drones": 2,
  "origin": {"lat": 45.5, "lon": -73.6, "alt": 20},
  "roi": [[-30, -20], [30, -20], [30, 20], [-30, 20]]
})";

PointCloud integer_grid(double half, double z_of_x_cut, double high) {
  PointCloud c;
  for (double x = -half; x <= half; x += 1)
    for (double y = -half; y <= half; y += 1) c.points.push_back({x, y, x >= z_of_x_cut ? high : 0.0});
  return c;
}

/// A path document whose waypoints sit exactly above integer grid points.
std::string path_doc(const std::vector<LocalPoint>& pts) {
  const Origin o(kAnchor);
  DronePath p{"drone1", {}};
  for (const auto& q : pts) p.waypoints.push_back(make_waypoint(o, q));
  return write_mission(o, {p});
}

int run_cli(const std::string& args, std::string* err = nullptr) {
  const fs::path log = dir() / "cli_stderr.txt";
  const std::string cmd = std::string(TERRAPATH_CLI) + " " + args + " 2> " + log.string() +
                          " > " + (dir() / "cli_stdout.txt").string();
  const int status = std::system(cmd.c_str());
  if (err) *err = read_file(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(PlanCommand, ValidConfigWritesSchemaValidPaths) {
  const auto cfg = put("plan.json", kPlanConfig);
  std::ostringstream log;
  const auto out = dir() / "paths.json";
  const CommandOutcome r = cmd_plan(cfg, out, log);
  ASSERT_EQ(r.exit_code, kExitOk) << log.str();
  const MissionPaths m = read_paths(std::string_view(read_file(out)));
  ASSERT_EQ(m.paths.size(), 2u);
  EXPECT_TRUE(m.origin_given);
  EXPECT_EQ(m.origin.anchor(), kAnchor);
  for (const auto& p : m.paths)
    for (const auto& w : p.waypoints) EXPECT_NEAR(w.position.alt, 50.0, 1e-3);
}

TEST(PlanCommand, SameConfigSameBytes) {
  const auto cfg = put("plan_det.json", kPlanConfig);
  std::ostringstream log;
  cmd_plan(cfg, dir() / "det_a.json", log);
  cmd_plan(cfg, dir() / "det_b.json", log);
  EXPECT_EQ(read_file(dir() / "det_a.json"), read_file(dir() / "det_b.json"));
  const fs::path golden = fs::path(TERRAPATH_TEST_DATA) / "plan_golden.json";
  EXPECT_EQ(read_file(dir() / "det_a.json"), read_file(golden));
}

TEST(PlanCommand, DegenerateRoiNamesTheKey) {
  const auto cfg = put("bad_roi.json", R"({"z_offset": 10, "origin": {"lat": 1, "lon": 2, "alt": 0},
    "roi": [[0, 0], [10, 0], [20, 0]]})");
  std::ostringstream log;
  const auto out = dir() / "never.json";
  const CommandOutcome r = cmd_plan(cfg, out, log);
  EXPECT_EQ(r.exit_code, kExitInput);
  EXPECT_NE(r.error.find("roi"), std::string::npos);
  EXPECT_NE(log.str().find("roi"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST(PlanCommand, MissingOriginOrRoi) {
  std::ostringstream log;
  EXPECT_EQ(cmd_plan(put("no_origin.json", R"({"z_offset": 1, "roi": [[0,0],[9,0],[9,9]]})"),
                     dir() / "x.json", log).exit_code,
            kExitInput);
  EXPECT_EQ(cmd_plan(put("no_roi.json", R"({"z_offset": 1, "origin": {"lat": 1, "lon": 2, "alt": 0}})"),
                     dir() / "x.json", log).exit_code,
            kExitInput);
  EXPECT_EQ(cmd_plan(dir() / "does_not_exist.json", dir() / "x.json", log).exit_code, kExitInput);
}

TEST(RefineCommand, FlatSceneIsAllNadir) {
  write_ply(dir() / "flat.ply", integer_grid(30, 1e9, 0));
  const auto paths = put("flat_paths.json", path_doc({{0, 0, 50}, {5, 0, 50}, {5, 5, 50}, {-7, 5, 50}}));
  const auto cfg = put("flat_cfg.json", R"({"z_offset": 10})");
  std::ostringstream log;
  const CommandOutcome r = cmd_refine(paths, dir() / "flat.ply", cfg, dir() / "flat_out.json", 2, log);
  ASSERT_EQ(r.exit_code, kExitOk) << log.str();
  EXPECT_TRUE(r.warnings.empty());
  const MissionPaths m = read_paths(std::string_view(read_file(dir() / "flat_out.json")));
  ASSERT_EQ(m.paths[0].waypoints.size(), 4u);
  for (const auto& w : m.paths[0].waypoints) {
    ASSERT_TRUE(w.gimbal);
    EXPECT_NEAR(w.gimbal->pitch_deg, -90.0, 1e-6);
    EXPECT_NEAR(w.position.alt, 30.0, 1e-3);  // 10 m above ground at origin altitude 20
    EXPECT_FALSE(w.inserted);
  }
}

TEST(RefineCommand, CliffInsertsWaypoints) {
  write_ply(dir() / "cliff.ply", integer_grid(40, 20, 15));
  const auto paths = put("cliff_paths.json", path_doc({{0, 0, 50}, {10, 0, 50}, {30, 0, 50}, {35, 0, 50}}));
  const auto cfg = put("cliff_cfg.json", R"({"z_offset": 10, "step": 1, "delta_z": 2})");
  std::ostringstream log;
  ASSERT_EQ(cmd_refine(paths, dir() / "cliff.ply", cfg, dir() / "cliff_out.json", 1, log).exit_code,
            kExitOk)
      << log.str();
  const std::string doc = read_file(dir() / "cliff_out.json");
  EXPECT_NE(doc.find("\"inserted\": true"), std::string::npos);
  const MissionPaths m = read_paths(std::string_view(doc));
  EXPECT_GT(m.paths[0].waypoints.size(), 4u);
}

TEST(RefineCommand, ErrorsMapToExitCodes) {
  write_ply(dir() / "small.ply", integer_grid(5, 1e9, 0));
  const auto cfg = put("small_cfg.json", R"({"z_offset": 10, "tol_max": 3})");
  std::ostringstream log;
  const auto near = put("near.json", path_doc({{0, 0, 50}, {1, 0, 50}}));
  EXPECT_EQ(cmd_refine(near, dir() / "missing.ply", cfg, dir() / "r.json", 1, log).exit_code,
            kExitInput);

  const auto far = put("far.json", path_doc({{0, 0, 50}, {400, 0, 50}}));
  std::ostringstream far_log;
  const auto out = dir() / "far_out.json";
  const CommandOutcome r = cmd_refine(far, dir() / "small.ply", cfg, out, 1, far_log);
  EXPECT_EQ(r.exit_code, kExitRuntime);
  EXPECT_NE(r.error.find("x=400"), std::string::npos) << r.error;
  EXPECT_FALSE(fs::exists(out));

  put("malformed.ply", "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n");
  const CommandOutcome bad = cmd_refine(near, dir() / "malformed.ply", cfg, dir() / "r.json", 1, log);
  EXPECT_EQ(bad.exit_code, kExitInput);
  EXPECT_NE(bad.error.find("byte"), std::string::npos) << bad.error;
}

TEST(EvalCommand, IdenticalAndShiftedClouds) {
  PointCloud truth;
  for (int x = 0; x < 20; ++x)
    for (int y = 0; y < 20; ++y) truth.points.push_back({double(x), double(y), 0});
  PointCloud moved = truth;
  for (auto& p : moved.points) p.x += 0.07;
  write_ply(dir() / "truth.ply", truth);
  write_ply(dir() / "moved.ply", moved);

  std::ostringstream out, log;
  ASSERT_EQ(cmd_eval(dir() / "truth.ply", dir() / "truth.ply", {0.05, 0.10}, std::nullopt, 1, out,
                     log).exit_code,
            kExitOk);
  auto j = nlohmann::json::parse(out.str());
  for (const auto& m : j["reports"][0]["metrics"]) EXPECT_EQ(m["f1"], 1.0);
  EXPECT_NE(log.str().find("100.00"), std::string::npos);

  const auto report = dir() / "moved.json";
  std::ostringstream out2, log2;
  ASSERT_EQ(cmd_eval(dir() / "moved.ply", dir() / "truth.ply", {0.05, 0.10}, report, 1, out2,
                     log2, "moved").exit_code,
            kExitOk);
  EXPECT_TRUE(out2.str().empty());
  j = nlohmann::json::parse(read_file(report));
  EXPECT_EQ(j["reports"][0]["method"], "moved");
  EXPECT_EQ(j["reports"][0]["metrics"][0]["precision"], 0.0);
  EXPECT_EQ(j["reports"][0]["metrics"][1]["recall"], 1.0);
}

TEST(EvalCommand, MalformedCloudReportsOffset) {
  put("trunc.ply", "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                   "property float z\nend_header\n1 2 3\n");
  write_ply(dir() / "one.ply", PointCloud{{{1, 2, 3}}});
  std::ostringstream out, log;
  const CommandOutcome r =
      cmd_eval(dir() / "trunc.ply", dir() / "one.ply", {0.05}, std::nullopt, 1, out, log);
  EXPECT_EQ(r.exit_code, kExitInput);
  EXPECT_NE(r.error.find("byte"), std::string::npos) << r.error;
  EXPECT_TRUE(out.str().empty());
}

TEST(SceneCommand, CountAndDeterminism) {
  SceneSpec s;
  s.size_x = 10;
  s.size_y = 10;
  s.density = 100;
  s.jitter = 0.3;
  s.seed = 5;
  std::ostringstream log;
  ASSERT_EQ(cmd_scene(s, dir() / "s1.ply", false, log).exit_code, kExitOk);
  ASSERT_EQ(cmd_scene(s, dir() / "s2.ply", false, log).exit_code, kExitOk);
  EXPECT_EQ(load_cloud(dir() / "s1.ply").size(), 10000u);
  EXPECT_EQ(read_file(dir() / "s1.ply"), read_file(dir() / "s2.ply"));
  ASSERT_EQ(cmd_scene(s, dir() / "s3.ply", true, log).exit_code, kExitOk);
  EXPECT_EQ(read_file(dir() / "s3.ply").rfind("ply\nformat ascii", 0), 0u);
}

TEST(ConfigShow, RoundTripsResolvedConfig) {
  const auto cfg = put("show.json", kPlanConfig);
  std::ostringstream out, log;
  ASSERT_EQ(cmd_config_show(cfg, out, log).exit_code, kExitOk);
  const MissionConfig again = read_config(std::string_view(out.str()));
  EXPECT_EQ(again, load_config(cfg));
  EXPECT_EQ(again.refine.z_offset, 10.0);
  EXPECT_EQ(again.plan.n_drones, 2);

  std::ostringstream out2, log2;
  const CommandOutcome bad = cmd_config_show(put("typo.json", R"({"z_offset": 1, "z_ofset": 2})"),
                                             out2, log2);
  EXPECT_EQ(bad.exit_code, kExitInput);
  EXPECT_NE(bad.error.find("z_ofset"), std::string::npos);
}

TEST(ConfigPath, FlagThenEnvironment) {
  ::unsetenv("MISSION_CONFIG");
  EXPECT_THROW(resolve_config_path(std::nullopt), InputError);
  ::setenv("MISSION_CONFIG", "/from/env.json", 1);
  EXPECT_EQ(resolve_config_path(std::nullopt), fs::path("/from/env.json"));
  EXPECT_EQ(resolve_config_path(std::string("/from/flag.json")), fs::path("/from/flag.json"));
  ::unsetenv("MISSION_CONFIG");
}

TEST(Executable, EndToEnd) {
  const auto cfg = put("cli.json", kPlanConfig);
  const std::string d = dir().string();
  std::string err;
  ASSERT_EQ(run_cli("scene -k plane --size-x 80 --size-y 80 --density 1 -o " + d + "/cli_scene.ply", &err), 0)
      << err;
  ASSERT_EQ(run_cli("plan -c " + cfg.string() + " -o " + d + "/cli_paths.json", &err), 0) << err;
  EXPECT_EQ(read_file(dir() / "cli_paths.json"), read_file(fs::path(TERRAPATH_TEST_DATA) / "plan_golden.json"));
  ASSERT_EQ(run_cli("-j 2 refine -p " + d + "/cli_paths.json --cloud " + d + "/cli_scene.ply -c " +
                        cfg.string() + " -o " + d + "/cli_mission.json",
                    &err),
            0)
      << err;
  EXPECT_NE(read_file(dir() / "cli_mission.json").find("gimbal_pitch_deg"), std::string::npos);
  ASSERT_EQ(run_cli("eval -r " + d + "/cli_scene.ply -t " + d + "/cli_scene.ply", &err), 0) << err;
  EXPECT_NE(err.find("F1-Score"), std::string::npos);  // table on stderr
  EXPECT_EQ(nlohmann::json::parse(read_file(dir() / "cli_stdout.txt"))["reports"][0]["metrics"][0]["f1"], 1.0);
}

TEST(Executable, ExitCodes) {
  const std::string d = dir().string();
  std::string err;
  EXPECT_EQ(run_cli("scene -k cube -o " + d + "/cube.ply", &err), 1);
  EXPECT_NE(err.find("cube"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir() / "cube.ply"));
  EXPECT_EQ(run_cli("eval -r " + d + "/nothing.ply -t " + d + "/nothing.ply", &err), 1);
  EXPECT_EQ(run_cli("config show -c " + d + "/nothing.json", &err), 1);
  EXPECT_NE(run_cli("", &err), 0);
}

TEST(Executable, ConfigFromEnvironment) {
  const auto cfg = put("env.json", kPlanConfig);
  ::unsetenv("MISSION_CONFIG");
  std::string err;
  const int code = run_cli("config show", &err);
  EXPECT_EQ(code, 1);
  EXPECT_NE(err.find("MISSION_CONFIG"), std::string::npos);
  ::setenv("MISSION_CONFIG", cfg.c_str(), 1);
  EXPECT_EQ(run_cli("config show", &err), 0) << err;
  ::unsetenv("MISSION_CONFIG");
  EXPECT_EQ(read_config(std::string_view(read_file(dir() / "cli_stdout.txt"))), load_config(cfg));
}
