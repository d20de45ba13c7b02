#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "terrapath/camera.hpp"
#include "terrapath/refine.hpp"
#include "terrapath/scene.hpp"

using namespace terrapath;

namespace {

const Origin kOrigin({-33.9, 151.2, 0.0});

Waypoint at(double x, double y, double z) { return make_waypoint(kOrigin, LocalPoint{x, y, z}); }

CameraConfig cam(double r0, double dr = 0.5) {
  CameraConfig c;
  c.r0 = r0;
  c.dr = dr;
  return c;
}

// -atan2(3, 6) in degrees, evaluated with 30-digit arithmetic.
constexpr double kPitchThreeOverSix = -26.5650511770779893515721937205;

}  // namespace

TEST(HemisphereTarget, SingleCandidate) {
  const SpatialIndex idx(PointCloud{{{0, 0, 0}}});
  const ViewTarget t = hemisphere_target(at(0, 0, 10), idx, cam(1, 1));
  EXPECT_EQ(t.point, (LocalPoint{0, 0, 0}));
  EXPECT_EQ(t.radius, 10.0);
}

TEST(HemisphereTarget, SphereMembership) {
  const SpatialIndex idx(PointCloud{{{3, 0, 7}}});
  const ViewTarget t = hemisphere_target(at(0, 0, 10), idx, cam(5));
  EXPECT_EQ(t.point, (LocalPoint{3, 0, 7}));
  EXPECT_EQ(t.radius, 5.0);
}

TEST(HemisphereTarget, TieGoesToNearerPoint) {
  const SpatialIndex idx(PointCloud{{{0, 0, 2}, {0, 0, 8}}});
  const ViewTarget t = hemisphere_target(at(0, 0, 10), idx, cam(10));
  EXPECT_DOUBLE_EQ(t.mean_z, 5.0);
  EXPECT_EQ(t.point, (LocalPoint{0, 0, 8}));
}

TEST(HemisphereTarget, StrictlyBelowOnly) {
  // A point level with the waypoint never qualifies, however close.
  const SpatialIndex idx(PointCloud{{{0.1, 0, 10}, {0, 0, 4}}});
  const ViewTarget t = hemisphere_target(at(0, 0, 10), idx, cam(1, 1));
  EXPECT_EQ(t.point, (LocalPoint{0, 0, 4}));
  EXPECT_EQ(t.candidates, 1u);
}

TEST(HemisphereTarget, NothingBelowWithinCap) {
  const SpatialIndex idx(PointCloud{{{0, 0, 20}}});
  CameraConfig c = cam(1);
  c.r_max = 30;
  EXPECT_THROW(hemisphere_target(at(0, 0, 10), idx, c), NoTargetFound);
}

TEST(ComputeYaw, AxisAndDiagonalCases) {
  const CameraConfig c;
  const Waypoint w = at(0, 0, 10);
  EXPECT_EQ(compute_yaw(w, {0, 5, 0}, c), 0.0);
  EXPECT_EQ(compute_yaw(w, {5, 0, 0}, c), 90.0);
  EXPECT_EQ(compute_yaw(w, {0, -5, 0}, c), 180.0);
  EXPECT_EQ(compute_yaw(w, {-5, 0, 0}, c), -90.0);
  EXPECT_NEAR(compute_yaw(w, {-1, -1, 0}, c), -135.0, 1e-12);
}

TEST(ComputeYaw, NadirUsesHeadingToNextWaypoint) {
  const CameraConfig c;
  const Waypoint w = at(2, 2, 10);
  EXPECT_EQ(compute_yaw(w, {2, 2, 0}, c, LocalPoint{12, 2, 10}), 90.0);
  EXPECT_EQ(compute_yaw(w, {2, 2, 0}, c), 0.0);
  EXPECT_EQ(compute_yaw(w, {2, 2, 0}, c, LocalPoint{2, 2, 30}), 0.0);
}

TEST(ComputePitch, ReferenceAngles) {
  const Waypoint w = at(0, 0, 10);
  EXPECT_EQ(compute_pitch(w, {0, 0, 0}), -90.0);
  EXPECT_DOUBLE_EQ(compute_pitch(w, {3, 0, 7}), -45.0);
  EXPECT_NEAR(compute_pitch(w, {6, 0, 7}), kPitchThreeOverSix, 1e-12);
  EXPECT_THROW(compute_pitch(w, {6, 0, 10}), InputError);
}

TEST(AnnotateAngles, FlatTerrainIsNadir) {
  PointCloud c;
  for (int x = -20; x <= 20; ++x)
    for (int y = -20; y <= 20; ++y) c.points.push_back({double(x), double(y), 0.0});
  const SpatialIndex idx(c);
  // Waypoints directly above grid points.
  DronePath p{"a", {at(0, 0, 15), at(5, 0, 15), at(5, 7, 15), at(-3, 7, 15)}};
  const AnnotatedPaths out = annotate_angles({p}, idx, CameraConfig{});
  ASSERT_EQ(out.paths.size(), 1u);
  EXPECT_TRUE(out.warnings.empty());
  const double yaws[] = {90, 0, -90, 0};  // last: no next waypoint
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_TRUE(out.paths[0].waypoints[i].gimbal);
    EXPECT_NEAR(out.paths[0].waypoints[i].gimbal->pitch_deg, -90.0, 1e-6);
    EXPECT_EQ(out.paths[0].waypoints[i].gimbal->yaw_deg, yaws[i]);
  }
}

TEST(AnnotateAngles, FacesWallToTheEast) {
  PointCloud c;
  for (double x = -10; x <= 5; x += 0.5)
    for (double y = -10; y <= 10; y += 0.5) c.points.push_back({x, y, 0.0});
  for (double y = -10; y <= 10; y += 0.25)
    for (double z = 0.25; z <= 20; z += 0.25) c.points.push_back({5, y, z});
  const SpatialIndex idx(c);
  DronePath p{"a", {}};
  for (double y = -6; y <= 6; y += 2) p.waypoints.push_back(at(0, y, 10));
  const AnnotatedPaths out = annotate_angles({p}, idx, CameraConfig{});
  for (const auto& w : out.paths[0].waypoints) {
    EXPECT_NEAR(w.gimbal->yaw_deg, 90.0, 1e-9);
    EXPECT_LT(w.gimbal->pitch_deg, 0.0);
    EXPECT_GT(w.gimbal->pitch_deg, -45.0);
  }
}

TEST(AnnotateAngles, MissingTargetFallsBackToNadirWithWarning) {
  const SpatialIndex idx(PointCloud{{{0, 0, 50}}});
  CameraConfig c;
  c.r_max = 20;
  DronePath p{"x", {at(0, 0, 10), at(0, 10, 10)}};
  DronePath q{"y", {at(1, 0, 60), at(2, 0, 60), at(3, 0, 60)}};
  const AnnotatedPaths out = annotate_angles({p, q}, idx, c, 2);
  std::size_t angles = 0;
  for (const auto& path : out.paths)
    for (const auto& w : path.waypoints) angles += w.gimbal.has_value();
  EXPECT_EQ(angles, 5u);
  ASSERT_EQ(out.warnings.size(), 2u);
  EXPECT_EQ(out.warnings[0].drone_id, "x");
  EXPECT_EQ(out.warnings[0].waypoint, 0u);
  EXPECT_EQ(out.warnings[1].waypoint, 1u);
  EXPECT_EQ(out.paths[0].waypoints[0].gimbal->pitch_deg, -90.0);
  EXPECT_EQ(out.paths[0].waypoints[0].gimbal->yaw_deg, 0.0);  // heading north to the next
}

TEST(CameraProperties, TargetsMatchBruteForceAndAnglesRoundTrip) {
  std::mt19937_64 rng(17);
  for (SceneKind kind : {SceneKind::Pile, SceneKind::BoxOnPlane, SceneKind::Staircase}) {
    SceneSpec s;
    s.kind = kind;
    s.jitter = 0.3;
    s.seed = rng();
    const PointCloud cloud = generate_scene(s);
    const SpatialIndex idx(cloud);
    const CameraConfig cfg;
    std::uniform_real_distribution<double> u(-18, 18), h(2, 25);
    for (int i = 0; i < 60; ++i) {
      const Waypoint w = at(u(rng), u(rng), h(rng));
      const ViewTarget t = hemisphere_target(w, idx, cfg);
      auto below_within = [&](double r) {
        std::vector<LocalPoint> out;
        for (const auto& p : cloud.points) {
          const double dx = p.x - w.local.x, dy = p.y - w.local.y, dz = p.z - w.local.z;
          if (std::sqrt(dx * dx + dy * dy + dz * dz) <= r && p.z < w.local.z) out.push_back(p);
        }
        return out;
      };
      const auto set = below_within(t.radius);
      ASSERT_EQ(set.size(), t.candidates);
      if (t.radius - cfg.dr >= cfg.r0) {
        EXPECT_TRUE(below_within(t.radius - cfg.dr).empty());
      }
      double mean = 0;
      for (const auto& p : set) mean += p.z;
      mean /= double(set.size());
      for (const auto& p : set) EXPECT_LE(std::abs(t.point.z - mean), std::abs(p.z - mean));
      EXPECT_LT(t.point.z, w.local.z);

      const double yaw = compute_yaw(w, t.point, cfg);
      const double pitch = compute_pitch(w, t.point);
      EXPECT_GE(pitch, -90.0);
      EXPECT_LT(pitch, 0.0);
      EXPECT_GT(yaw, -180.0);
      EXPECT_LE(yaw, 180.0);
      const double d = std::numbers::pi / 180;
      const double v[3] = {std::cos(pitch * d) * std::sin(yaw * d),
                           std::cos(pitch * d) * std::cos(yaw * d), std::sin(pitch * d)};
      const double dx = t.point.x - w.local.x, dy = t.point.y - w.local.y,
                   dz = t.point.z - w.local.z;
      const double n = std::sqrt(dx * dx + dy * dy + dz * dz);
      EXPECT_NEAR(v[0], dx / n, 1e-6);
      EXPECT_NEAR(v[1], dy / n, 1e-6);
      EXPECT_NEAR(v[2], dz / n, 1e-6);
    }
  }
}

TEST(CameraProperties, ThreadCountDoesNotChangeAngles) {
  SceneSpec s;
  s.kind = SceneKind::Pile;
  const SpatialIndex idx(generate_scene(s));
  DronePath p{"a", {}};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-18, 18);
  for (int i = 0; i < 300; ++i) p.waypoints.push_back(at(u(rng), u(rng), 14));
  const auto one = annotate_angles({p}, idx, CameraConfig{}, 1);
  const auto many = annotate_angles({p}, idx, CameraConfig{}, 4);
  EXPECT_EQ(one.paths, many.paths);
}

TEST(CameraConfig, Validation) {
  CameraConfig c;
  EXPECT_NO_THROW(validate(c));
  c.r_max = 0.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = CameraConfig{};
  c.dr = 0;
  EXPECT_THROW(validate(c), ConfigError);
}
