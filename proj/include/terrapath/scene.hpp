#pragma once

// Deterministic synthetic test scenes sampled on regular grids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "terrapath/errors.hpp"
#include "terrapath/pointcloud.hpp"

namespace terrapath {

enum class SceneKind { Plane, Ramp, BoxOnPlane, Pile, Staircase };

inline SceneKind parse_scene_kind(std::string_view s) {
  if (s == "plane") return SceneKind::Plane;
  if (s == "ramp") return SceneKind::Ramp;
  if (s == "box-on-plane") return SceneKind::BoxOnPlane;
  if (s == "pile") return SceneKind::Pile;
  if (s == "staircase") return SceneKind::Staircase;
  throw InputError("unknown scene kind '" + std::string(s) +
                   "' (expected plane, ramp, box-on-plane, pile or staircase)");
}

/// Ground spans [-size_x/2, size_x/2] x [-size_y/2, size_y/2] around the
/// origin. `feature_size` is the box side, pile base diameter or stair tread
/// depth; `height` the box height, pile height or stair rise.
struct SceneSpec {
  SceneKind kind = SceneKind::Plane;
  double size_x = 40.0;
  double size_y = 40.0;
  double height = 10.0;
  double feature_size = 10.0;
  double slope = 0.5;    // ramp only: z = slope * x
  double density = 4.0;  // points per square meter
  std::uint64_t seed = 0;
  double jitter = 0.0;   // in-surface jitter as a fraction of the grid cell
};

namespace detail {

class SceneSampler {
 public:
  SceneSampler(const SceneSpec& spec) : spec_(spec), rng_(spec.seed) {}

  /// Cell-centered grid over a w x h rectangle; fn(u, v) places each sample.
  template <typename Place>
  void grid(double w, double h, Place&& place) {
    const double per_m = std::sqrt(spec_.density);
    const auto nu = static_cast<long>(std::llround(w * per_m));
    const auto nv = static_cast<long>(std::llround(h * per_m));
    if (nu <= 0 || nv <= 0) return;
    const double du = w / static_cast<double>(nu);
    const double dv = h / static_cast<double>(nv);
    for (long j = 0; j < nv; ++j) {
      for (long i = 0; i < nu; ++i) {
        double u = (static_cast<double>(i) + 0.5) * du;
        double v = (static_cast<double>(j) + 0.5) * dv;
        if (spec_.jitter > 0.0) {
          u += (unit() - 0.5) * spec_.jitter * du;
          v += (unit() - 0.5) * spec_.jitter * dv;
        }
        place(u, v);
      }
    }
  }

 private:
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  const SceneSpec& spec_;
  std::mt19937_64 rng_;
};

}  // namespace detail

inline void validate(const SceneSpec& s) {
  auto positive = [](const char* name, double v) {
    if (!std::isfinite(v) || !(v > 0.0)) throw InputError(std::string(name) + " must be > 0");
  };
  positive("size_x", s.size_x);
  positive("size_y", s.size_y);
  positive("density", s.density);
  positive("height", s.height);
  positive("feature_size", s.feature_size);
  if (!std::isfinite(s.slope)) throw InputError("slope must be finite");
  if (!(s.jitter >= 0.0 && s.jitter < 1.0)) throw InputError("jitter must be in [0, 1)");
}

inline PointCloud generate_scene(const SceneSpec& spec) {
  validate(spec);
  PointCloud cloud;
  auto& pts = cloud.points;
  detail::SceneSampler sampler(spec);
  const double x0 = -spec.size_x / 2.0;
  const double y0 = -spec.size_y / 2.0;

  switch (spec.kind) {
    case SceneKind::Plane:
      sampler.grid(spec.size_x, spec.size_y,
                   [&](double u, double v) { pts.push_back({x0 + u, y0 + v, 0.0}); });
      break;

    case SceneKind::Ramp:
      sampler.grid(spec.size_x, spec.size_y, [&](double u, double v) {
        pts.push_back({x0 + u, y0 + v, spec.slope * (x0 + u)});
      });
      break;

    case SceneKind::BoxOnPlane: {
      const double s = spec.feature_size / 2.0;
      const double h = spec.height;
      sampler.grid(spec.size_x, spec.size_y, [&](double u, double v) {
        const double x = x0 + u;
        const double y = y0 + v;
        if (std::abs(x) < s && std::abs(y) < s) return;  // under the box
        pts.push_back({x, y, 0.0});
      });
      const double side = 2.0 * s;
      sampler.grid(side, h, [&](double u, double z) { pts.push_back({s, -s + u, z}); });
      sampler.grid(side, h, [&](double u, double z) { pts.push_back({-s, -s + u, z}); });
      sampler.grid(side, h, [&](double u, double z) { pts.push_back({-s + u, s, z}); });
      sampler.grid(side, h, [&](double u, double z) { pts.push_back({-s + u, -s, z}); });
      sampler.grid(side, side, [&](double u, double v) { pts.push_back({-s + u, -s + v, h}); });
      break;
    }

    case SceneKind::Pile: {
      // Spherical cap: base radius a, apex height h.
      const double a = spec.feature_size / 2.0;
      const double h = spec.height;
      const double big_r = (a * a + h * h) / (2.0 * h);
      sampler.grid(spec.size_x, spec.size_y, [&](double u, double v) {
        const double x = x0 + u;
        const double y = y0 + v;
        const double r2 = x * x + y * y;
        const double z = r2 < a * a ? std::sqrt(big_r * big_r - r2) - (big_r - h) : 0.0;
        pts.push_back({x, y, std::max(0.0, z)});
      });
      break;
    }

    case SceneKind::Staircase: {
      const double tread = spec.feature_size;
      const double rise = spec.height;
      sampler.grid(spec.size_x, spec.size_y, [&](double u, double v) {
        pts.push_back({x0 + u, y0 + v, rise * std::floor(u / tread)});
      });
      for (long k = 1; static_cast<double>(k) * tread < spec.size_x; ++k) {
        const double x = x0 + static_cast<double>(k) * tread;
        const double base = rise * static_cast<double>(k - 1);
        sampler.grid(spec.size_y, rise,
                     [&](double v, double z) { pts.push_back({x, y0 + v, base + z}); });
      }
      break;
    }
  }
  return cloud;
}

}  // namespace terrapath
