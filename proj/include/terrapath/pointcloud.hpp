#pragma once

// Point clouds and the exact spatial index built over them.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "terrapath/errors.hpp"
#include "terrapath/geo.hpp"
#include "terrapath/kdtree.hpp"

namespace terrapath {

struct PointCloud {
  std::vector<LocalPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool operator==(const PointCloud&) const = default;
};

/// Result of a spatial query: parent-cloud indices in ascending order plus
/// the matching coordinates.
struct PointSet {
  std::vector<std::uint32_t> indices;
  std::vector<LocalPoint> points;

  std::size_t size() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
};

/// Immutable accelerator over a cloud: a 3D KD-tree for sphere and
/// nearest-neighbor queries and a 2D tree over the (x, y) projection for
/// vertical-column queries. Safe for concurrent reads.
class SpatialIndex {
 public:
  explicit SpatialIndex(PointCloud cloud)
      : cloud_(std::make_shared<const PointCloud>(std::move(cloud))) {
    if (cloud_->empty()) throw InputError("cannot index an empty point cloud");
    if (cloud_->size() >= std::numeric_limits<std::uint32_t>::max())
      throw InputError("point cloud too large to index");
    std::vector<KdTree<3>::Point> xyz;
    xyz.reserve(cloud_->size());
    for (const auto& p : cloud_->points) xyz.push_back({p.x, p.y, p.z});
    tree3_ = KdTree<3>(xyz);
    xyz.clear();
    xyz.shrink_to_fit();
    std::vector<KdTree<2>::Point> xy;
    xy.reserve(cloud_->size());
    for (const auto& p : cloud_->points) xy.push_back({p.x, p.y});
    tree2_ = KdTree<2>(xy);
  }

  const PointCloud& cloud() const noexcept { return *cloud_; }
  std::size_t size() const noexcept { return cloud_->size(); }

  /// Points whose horizontal distance to (x, y) is <= tol; z unconstrained.
  PointSet query_disk_xy(double x, double y, double tol) const {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw InputError("disk tolerance must be positive");
    return resolve(tree2_.radius({x, y}, tol));
  }

  /// Points whose Euclidean distance to `center` is <= r.
  PointSet query_sphere(const LocalPoint& center, double r) const {
    if (!(r > 0.0) || !std::isfinite(r)) throw InputError("sphere radius must be positive");
    return resolve(tree3_.radius({center.x, center.y, center.z}, r));
  }

  /// Index and distance of the nearest point (lowest index on ties).
  std::pair<std::uint32_t, double> nearest(const LocalPoint& q) const {
    auto [id, d2] = tree3_.nearest({q.x, q.y, q.z});
    return {id, std::sqrt(d2)};
  }

  /// The k nearest indices ordered by (distance, index).
  std::vector<std::uint32_t> knn(const LocalPoint& q, std::size_t k) const {
    std::vector<std::uint32_t> out;
    for (const auto& [d2, id] : tree3_.knn({q.x, q.y, q.z}, k)) out.push_back(id);
    return out;
  }

 private:
  PointSet resolve(std::vector<std::uint32_t> ids) const {
    PointSet set;
    set.points.reserve(ids.size());
    for (auto id : ids) set.points.push_back(cloud_->points[id]);
    set.indices = std::move(ids);
    return set;
  }

  std::shared_ptr<const PointCloud> cloud_;
  KdTree<3> tree3_;
  KdTree<2> tree2_;
};

inline SpatialIndex build_index(PointCloud cloud) { return SpatialIndex(std::move(cloud)); }

}  // namespace terrapath
