#pragma once

// Reconstruction-quality evaluation.
//
// Cloud-to-cloud metrics: each point's distance to its nearest neighbor in
// the other cloud, thresholded into precision (reconstruction -> truth),
// recall (truth -> reconstruction) and F1.
//
// Visibility coverage: a proxy for "this surface point would reconstruct".
// A truth point counts as observed when it falls inside some viewpoint's
// frustum and the sight ray reaches it without crossing an occupied voxel of
// the truth cloud. Surfaces seen at grazing angles are hidden by the voxels
// of their own neighbors, which is what makes nadir-only capture miss walls.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "terrapath/errors.hpp"
#include "terrapath/parallel.hpp"
#include "terrapath/path.hpp"
#include "terrapath/planner.hpp"
#include "terrapath/pointcloud.hpp"

namespace terrapath {

// ---------------------------------------------------------------------------
// Cloud-to-cloud metrics

inline std::vector<double> c2c_distances(const PointCloud& from, const SpatialIndex& to,
                                         unsigned threads = 1) {
  if (from.empty()) throw InputError("c2c source cloud is empty");
  std::vector<double> d(from.size());
  parallel_for(from.size(), threads,
               [&](std::size_t i) { d[i] = to.nearest(from.points[i]).second; });
  return d;
}

inline std::vector<double> c2c_distances(const PointCloud& from, const PointCloud& to,
                                         unsigned threads = 1) {
  if (from.empty() || to.empty()) throw InputError("c2c needs two non-empty clouds");
  return c2c_distances(from, SpatialIndex(to), threads);
}

struct CoverageReport {
  std::string label;
  std::vector<double> thresholds;  // meters
  std::vector<double> precision;   // fractions in [0, 1]
  std::vector<double> recall;
  std::vector<double> f1;
};

inline double f1_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

/// Fraction of distances <= tau, counted in index order.
inline double fraction_within(const std::vector<double>& d, double tau) {
  std::size_t n = 0;
  for (double v : d) n += v <= tau ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(d.size());
}

inline CoverageReport coverage_metrics(const PointCloud& reconstructed, const PointCloud& truth,
                                       const std::vector<double>& thresholds,
                                       unsigned threads = 1, std::string label = "") {
  if (thresholds.empty()) throw InputError("at least one threshold is required");
  for (double t : thresholds)
    if (!std::isfinite(t) || t < 0.0) throw InputError("thresholds must be finite and >= 0");
  if (reconstructed.empty() || truth.empty()) throw InputError("metrics need two non-empty clouds");
  const auto to_truth = c2c_distances(reconstructed, truth, threads);
  const auto to_recon = c2c_distances(truth, reconstructed, threads);
  CoverageReport r{std::move(label), thresholds, {}, {}, {}};
  for (double t : thresholds) {
    const double p = fraction_within(to_truth, t);
    const double q = fraction_within(to_recon, t);
    r.precision.push_back(p);
    r.recall.push_back(q);
    r.f1.push_back(f1_score(p, q));
  }
  return r;
}

inline nlohmann::ordered_json report_to_json(const std::vector<CoverageReport>& reports) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json row;
    row["method"] = r.label;
    auto metrics = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.thresholds.size(); ++i) {
      metrics.push_back({{"threshold_m", r.thresholds[i]},
                         {"precision", r.precision[i]},
                         {"recall", r.recall[i]},
                         {"f1", r.f1[i]}});
    }
    row["metrics"] = metrics;
    rows.push_back(row);
  }
  return {{"reports", rows}};
}

inline std::string threshold_label(double t) {
  std::ostringstream s;
  const double cm = t * 100.0;
  if (std::abs(cm - std::round(cm)) < 1e-9) s << std::llround(cm) << "cm";
  else s << t << "m";
  return s.str();
}

/// Aligned text table: one row per method, then precision, recall and F1
/// (percent) at each threshold.
inline std::string report_table(const std::vector<CoverageReport>& reports) {
  if (reports.empty()) return "";
  const auto& th = reports.front().thresholds;
  std::size_t label_w = 6;
  for (const auto& r : reports) label_w = std::max(label_w, r.label.size());
  const int cell = 8;
  std::ostringstream s;
  auto group = [&](const char* name) {
    const int w = cell * static_cast<int>(th.size()) - 1;
    s << " | " << std::left << std::setw(w) << name;
  };
  s << std::left << std::setw(static_cast<int>(label_w)) << "Method";
  group("Precision (%)");
  group("Recall (%)");
  group("F1-Score (%)");
  s << "\n" << std::setw(static_cast<int>(label_w)) << "";
  for (int g = 0; g < 3; ++g) {
    s << " |";
    for (double t : th) s << " " << std::right << std::setw(cell - 1) << threshold_label(t) << "";
  }
  s << "\n";
  for (const auto& r : reports) {
    s << std::left << std::setw(static_cast<int>(label_w)) << r.label;
    for (const auto* col : {&r.precision, &r.recall, &r.f1}) {
      s << " |";
      for (double v : *col) s << " " << std::right << std::setw(cell - 1) << std::fixed
                              << std::setprecision(2) << v * 100.0;
    }
    s << "\n";
  }
  return s.str();
}

// ---------------------------------------------------------------------------
// Visibility

struct VisibilityConfig {
  CameraModel camera;
  double max_range = 200.0;
  double voxel = 0.5;
  double occlusion_slack = 0.9;
};

inline void validate(const VisibilityConfig& c) {
  validate(c.camera);
  for (double v : {c.max_range, c.voxel, c.occlusion_slack})
    if (!std::isfinite(v) || !(v > 0.0))
      throw InputError("visibility parameters must be finite and positive");
}

namespace detail {

struct Frame {
  LocalPoint eye;
  double fwd[3];
  double right[3];
  double up[3];
};

inline Frame camera_frame(const Waypoint& wp) {
  const double deg = std::numbers::pi / 180.0;
  const double yaw = wp.gimbal->yaw_deg * deg;
  const double pitch = wp.gimbal->pitch_deg * deg;
  Frame f{wp.local, {}, {}, {}};
  f.fwd[0] = std::cos(pitch) * std::sin(yaw);
  f.fwd[1] = std::cos(pitch) * std::cos(yaw);
  f.fwd[2] = std::sin(pitch);
  f.right[0] = std::cos(yaw);
  f.right[1] = -std::sin(yaw);
  f.right[2] = 0.0;
  // up = right x fwd
  f.up[0] = f.right[1] * f.fwd[2] - f.right[2] * f.fwd[1];
  f.up[1] = f.right[2] * f.fwd[0] - f.right[0] * f.fwd[2];
  f.up[2] = f.right[0] * f.fwd[1] - f.right[1] * f.fwd[0];
  return f;
}

class VoxelSet {
 public:
  VoxelSet(const PointCloud& cloud, double size) : size_(size) {
    cells_.reserve(cloud.size());
    for (const auto& p : cloud.points) cells_.insert(key(cell(p.x), cell(p.y), cell(p.z)));
  }

  long cell(double v) const {
    const double c = std::floor(v / size_);
    if (std::abs(c) >= static_cast<double>(kBias))
      throw InputError("cloud extent too large for the occlusion grid");
    return static_cast<long>(c);
  }

  bool occupied(long i, long j, long k) const { return cells_.count(key(i, j, k)) != 0; }
  double size() const noexcept { return size_; }

 private:
  static constexpr long kBias = 1L << 20;

  static std::uint64_t key(long i, long j, long k) {
    return (static_cast<std::uint64_t>(i + kBias) << 42) |
           (static_cast<std::uint64_t>(j + kBias) << 21) | static_cast<std::uint64_t>(k + kBias);
  }

  double size_;
  std::unordered_set<std::uint64_t> cells_;
};

/// Walks the voxels pierced by the segment eye -> target. Returns true when
/// an occupied voxel other than the eye's and the target's own is entered
/// before `limit` (distance along the segment).
inline bool ray_blocked(const VoxelSet& grid, const LocalPoint& eye, const LocalPoint& target,
                        double limit) {
  const double o[3] = {eye.x, eye.y, eye.z};
  const double d[3] = {target.x - eye.x, target.y - eye.y, target.z - eye.z};
  const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (len == 0.0) return false;
  const double s = grid.size();
  long cell[3] = {grid.cell(o[0]), grid.cell(o[1]), grid.cell(o[2])};
  const long goal[3] = {grid.cell(target.x), grid.cell(target.y), grid.cell(target.z)};
  long step[3];
  double t_max[3];
  double t_delta[3];
  for (int a = 0; a < 3; ++a) {
    const double dir = d[a] / len;  // t is measured in meters along the ray
    if (dir > 0) {
      step[a] = 1;
      t_max[a] = ((static_cast<double>(cell[a]) + 1.0) * s - o[a]) / dir;
      t_delta[a] = s / dir;
    } else if (dir < 0) {
      step[a] = -1;
      t_max[a] = (static_cast<double>(cell[a]) * s - o[a]) / dir;
      t_delta[a] = -s / dir;
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  while (true) {
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    const double t_enter = t_max[a];
    if (!(t_enter < limit) || !(t_enter < len)) return false;
    cell[a] += step[a];
    t_max[a] += t_delta[a];
    if (cell[0] == goal[0] && cell[1] == goal[1] && cell[2] == goal[2]) return false;
    if (grid.occupied(cell[0], cell[1], cell[2])) return true;
  }
}

}  // namespace detail

/// Whether `p` lies inside the viewpoint's frustum and within max_range.
inline bool in_frustum(const Waypoint& wp, const LocalPoint& p, const VisibilityConfig& cfg) {
  const auto f = detail::camera_frame(wp);
  const double v[3] = {p.x - f.eye.x, p.y - f.eye.y, p.z - f.eye.z};
  const double dist = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (dist > cfg.max_range) return false;
  const double depth = v[0] * f.fwd[0] + v[1] * f.fwd[1] + v[2] * f.fwd[2];
  if (!(depth > 0.0)) return false;
  const double deg = std::numbers::pi / 180.0;
  const double across = v[0] * f.right[0] + v[1] * f.right[1] + v[2] * f.right[2];
  const double vertical = v[0] * f.up[0] + v[1] * f.up[1] + v[2] * f.up[2];
  return std::abs(across) <= std::tan(cfg.camera.hfov_deg * deg / 2.0) * depth &&
         std::abs(vertical) <= std::tan(cfg.camera.vfov_deg * deg / 2.0) * depth;
}

inline PointSet visible_points(const std::vector<Waypoint>& viewpoints, const PointCloud& truth,
                               const VisibilityConfig& cfg, unsigned threads = 1) {
  validate(cfg);
  for (std::size_t i = 0; i < viewpoints.size(); ++i)
    if (!viewpoints[i].gimbal)
      throw InputError("viewpoint " + std::to_string(i) + " has no gimbal angles");
  const detail::VoxelSet grid(truth, cfg.voxel);
  std::vector<char> seen(truth.size(), 0);
  parallel_for(truth.size(), threads, [&](std::size_t i) {
    const LocalPoint& p = truth.points[i];
    for (const auto& vp : viewpoints) {
      if (!in_frustum(vp, p, cfg)) continue;
      const double dist = std::sqrt(KdTree<3>::squared_distance({p.x, p.y, p.z},
                                                                {vp.local.x, vp.local.y, vp.local.z}));
      if (!detail::ray_blocked(grid, vp.local, p, dist - cfg.occlusion_slack)) {
        seen[i] = 1;
        return;
      }
    }
  });
  PointSet out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!seen[i]) continue;
    out.indices.push_back(static_cast<std::uint32_t>(i));
    out.points.push_back(truth.points[i]);
  }
  return out;
}

inline constexpr std::size_t kNormalNeighbors = 16;
inline constexpr double kVerticalNormalZ = 0.5;

/// Marks points whose local best-fit plane (over their k nearest neighbors,
/// the point itself included) has |normal_z| < 0.5.
inline std::vector<char> classify_vertical(const PointCloud& cloud, const SpatialIndex& index,
                                           unsigned threads = 1) {
  if (cloud.size() < kNormalNeighbors)
    throw InputError("cloud too sparse for " + std::to_string(kNormalNeighbors) +
                     "-point neighborhoods");
  std::vector<char> vertical(cloud.size(), 0);
  parallel_for(cloud.size(), threads, [&](std::size_t i) {
    const auto nn = index.knn(cloud.points[i], kNormalNeighbors);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (auto id : nn) {
      const auto& q = index.cloud().points[id];
      mean += Eigen::Vector3d(q.x, q.y, q.z);
    }
    mean /= static_cast<double>(nn.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto id : nn) {
      const auto& q = index.cloud().points[id];
      const Eigen::Vector3d d = Eigen::Vector3d(q.x, q.y, q.z) - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d normal = solver.eigenvectors().col(0);  // smallest eigenvalue
    vertical[i] = std::abs(normal.z()) < kVerticalNormalZ ? 1 : 0;
  });
  return vertical;
}

struct SurfaceCoverage {
  std::size_t vertical_points = 0;
  std::size_t horizontal_points = 0;
  std::size_t vertical_visible = 0;
  std::size_t horizontal_visible = 0;
  std::optional<double> vertical_fraction;  // empty when the scene has no vertical points
  std::optional<double> horizontal_fraction;
};

inline SurfaceCoverage surface_coverage(const std::vector<Waypoint>& viewpoints,
                                        const PointCloud& truth, const VisibilityConfig& cfg,
                                        unsigned threads = 1) {
  const SpatialIndex index(truth);
  const auto vertical = classify_vertical(truth, index, threads);
  const PointSet seen = visible_points(viewpoints, truth, cfg, threads);
  std::vector<char> visible(truth.size(), 0);
  for (auto i : seen.indices) visible[i] = 1;
  SurfaceCoverage c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (vertical[i]) {
      ++c.vertical_points;
      c.vertical_visible += visible[i];
    } else {
      ++c.horizontal_points;
      c.horizontal_visible += visible[i];
    }
  }
  if (c.vertical_points > 0)
    c.vertical_fraction = static_cast<double>(c.vertical_visible) / c.vertical_points;
  if (c.horizontal_points > 0)
    c.horizontal_fraction = static_cast<double>(c.horizontal_visible) / c.horizontal_points;
  return c;
}

}  // namespace terrapath
