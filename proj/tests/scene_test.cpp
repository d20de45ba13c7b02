#include <cmath>

#include <gtest/gtest.h>

#include "terrapath/cloud_io.hpp"
#include "terrapath/scene.hpp"

using namespace terrapath;

TEST(SceneKindNames, ParseAndReject) {
  EXPECT_EQ(parse_scene_kind("plane"), SceneKind::Plane);
  EXPECT_EQ(parse_scene_kind("ramp"), SceneKind::Ramp);
  EXPECT_EQ(parse_scene_kind("box-on-plane"), SceneKind::BoxOnPlane);
  EXPECT_EQ(parse_scene_kind("pile"), SceneKind::Pile);
  EXPECT_EQ(parse_scene_kind("staircase"), SceneKind::Staircase);
  EXPECT_THROW(parse_scene_kind("cube"), InputError);
  EXPECT_THROW(parse_scene_kind(""), InputError);
}

TEST(GenerateScene, PlanePointCount) {
  SceneSpec s;
  s.size_x = 10;
  s.size_y = 10;
  s.density = 100;
  const PointCloud c = generate_scene(s);
  EXPECT_EQ(c.size(), 10000u);
  for (const auto& p : c.points) {
    EXPECT_EQ(p.z, 0.0);
    EXPECT_LT(std::abs(p.x), 5.0);
    EXPECT_LT(std::abs(p.y), 5.0);
  }
}

TEST(GenerateScene, RampFollowsSlope) {
  SceneSpec s;
  s.kind = SceneKind::Ramp;
  s.slope = 0.25;
  s.jitter = 0.5;
  for (const auto& p : generate_scene(s).points) EXPECT_DOUBLE_EQ(p.z, 0.25 * p.x);
}

TEST(GenerateScene, BoxFacesLieOnTheirPlanes) {
  SceneSpec s;
  s.kind = SceneKind::BoxOnPlane;
  s.feature_size = 8;
  s.height = 6;
  s.jitter = 0.4;
  s.seed = 11;
  std::size_t walls = 0, roof = 0;
  for (const auto& p : generate_scene(s).points) {
    const bool on_ground = p.z == 0.0 && (std::abs(p.x) >= 4 || std::abs(p.y) >= 4);
    const bool on_roof = p.z == 6.0 && std::abs(p.x) <= 4 && std::abs(p.y) <= 4;
    const bool on_wall = (std::abs(p.x) == 4.0 && std::abs(p.y) <= 4) ||
                         (std::abs(p.y) == 4.0 && std::abs(p.x) <= 4);
    EXPECT_TRUE(on_ground || on_roof || (on_wall && p.z >= 0 && p.z <= 6))
        << p.x << " " << p.y << " " << p.z;
    walls += on_wall && !on_roof && p.z > 0;
    roof += on_roof;
  }
  EXPECT_EQ(walls, 4u * 16u * 12u);
  EXPECT_EQ(roof, 16u * 16u);
}

TEST(GenerateScene, PileIsARoundedMound) {
  SceneSpec s;
  s.kind = SceneKind::Pile;
  s.feature_size = 12;
  s.height = 3;
  double top = 0;
  for (const auto& p : generate_scene(s).points) {
    const double r = std::hypot(p.x, p.y);
    if (r >= 6) {
      EXPECT_EQ(p.z, 0.0);
    } else {
      EXPECT_GE(p.z, 0.0);
      EXPECT_LE(p.z, 3.0);
    }
    top = std::max(top, p.z);
  }
  EXPECT_GT(top, 2.9);
}

TEST(GenerateScene, StaircaseSteps) {
  SceneSpec s;
  s.kind = SceneKind::Staircase;
  s.size_x = 20;
  s.feature_size = 5;
  s.height = 1;
  double top = 0;
  for (const auto& p : generate_scene(s).points) top = std::max(top, p.z);
  EXPECT_DOUBLE_EQ(top, 3.0);
}

TEST(GenerateScene, SameSeedSameBytes) {
  SceneSpec s;
  s.kind = SceneKind::Pile;
  s.jitter = 0.6;
  s.seed = 42;
  const std::string a = encode_ply_binary(generate_scene(s));
  EXPECT_EQ(a, encode_ply_binary(generate_scene(s)));
  s.seed = 43;
  EXPECT_NE(a, encode_ply_binary(generate_scene(s)));
}

TEST(GenerateScene, Validation) {
  SceneSpec s;
  s.density = 0;
  EXPECT_THROW(generate_scene(s), InputError);
  s = SceneSpec{};
  s.jitter = 1.0;
  EXPECT_THROW(generate_scene(s), InputError);
  s = SceneSpec{};
  s.size_x = std::nan("");
  EXPECT_THROW(generate_scene(s), InputError);
}
