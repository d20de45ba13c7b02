#pragma once

// Static balanced KD-tree over fixed-dimension double coordinates.
//
// Radius queries use the predicate sqrt(sum of squared deltas) <= r, so
// their result sets are exactly what a linear scan with the same predicate
// returns. Pruning only discards a subtree when the gap to its splitting
// plane alone already exceeds the radius.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace terrapath {

template <std::size_t Dim>
class KdTree {
 public:
  using Point = std::array<double, Dim>;

  static constexpr std::uint32_t kLeafSize = 12;

  KdTree() = default;

  explicit KdTree(std::span<const Point> points) {
    entries_.resize(points.size());
    for (std::uint32_t i = 0; i < entries_.size(); ++i) entries_[i] = {points[i], i};
    if (!entries_.empty()) {
      nodes_.reserve(4 * entries_.size() / kLeafSize + 1);
      build(0, static_cast<std::uint32_t>(entries_.size()));
    }
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  static double squared_distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < Dim; ++d) {
      const double delta = a[d] - b[d];
      s += delta * delta;
    }
    return s;
  }

  /// Calls `visit(id)` for every point with distance <= radius (any order).
  template <typename Visit>
  void radius(const Point& q, double r, Visit&& visit) const {
    if (nodes_.empty()) return;
    radius_rec(0, q, r, visit);
  }

  std::vector<std::uint32_t> radius(const Point& q, double r) const {
    std::vector<std::uint32_t> out;
    radius(q, r, [&](std::uint32_t id) { out.push_back(id); });
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Nearest point; ties resolve to the lowest id. Returns {id, squared distance}.
  std::pair<std::uint32_t, double> nearest(const Point& q) const {
    std::pair<std::uint32_t, double> best{std::numeric_limits<std::uint32_t>::max(),
                                          std::numeric_limits<double>::infinity()};
    if (!nodes_.empty()) nearest_rec(0, q, best);
    return best;
  }

  /// The k nearest points ordered by (squared distance, id).
  std::vector<std::pair<double, std::uint32_t>> knn(const Point& q, std::size_t k) const {
    std::priority_queue<std::pair<double, std::uint32_t>> heap;
    if (k > 0 && !nodes_.empty()) knn_rec(0, q, k, heap);
    std::vector<std::pair<double, std::uint32_t>> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top();
      heap.pop();
    }
    return out;
  }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;  // -1 marks a leaf
    std::int32_t right = -1;
    std::uint32_t dim = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return index;

    Point lo = entries_[begin].p;
    Point hi = entries_[begin].p;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      for (std::size_t d = 0; d < Dim; ++d) {
        lo[d] = std::min(lo[d], entries_[i].p[d]);
        hi[d] = std::max(hi[d], entries_[i].p[d]);
      }
    }
    std::uint32_t dim = 0;
    for (std::uint32_t d = 1; d < Dim; ++d)
      if (hi[d] - lo[d] > hi[dim] - lo[dim]) dim = d;

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(entries_.begin() + begin, entries_.begin() + mid, entries_.begin() + end,
                     [dim](const Entry& a, const Entry& b) {
                       if (a.p[dim] != b.p[dim]) return a.p[dim] < b.p[dim];
                       return a.id < b.id;
                     });

    nodes_[index].dim = dim;
    nodes_[index].split = entries_[mid].p[dim];
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  template <typename Visit>
  void radius_rec(std::int32_t ni, const Point& q, double r, Visit& visit) const {
    const Node& n = nodes_[ni];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i)
        if (std::sqrt(squared_distance(entries_[i].p, q)) <= r) visit(entries_[i].id);
      return;
    }
    // Left holds coords <= split, right holds coords >= split.
    if (!(q[n.dim] - n.split > r)) radius_rec(n.left, q, r, visit);
    if (!(n.split - q[n.dim] > r)) radius_rec(n.right, q, r, visit);
  }

  void nearest_rec(std::int32_t ni, const Point& q, std::pair<std::uint32_t, double>& best) const {
    const Node& n = nodes_[ni];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Entry& e = entries_[i];
        const double d2 = squared_distance(e.p, q);
        if (d2 < best.second || (d2 == best.second && e.id < best.first)) best = {e.id, d2};
      }
      return;
    }
    const double gap = q[n.dim] - n.split;
    const std::int32_t near = gap <= 0 ? n.left : n.right;
    const std::int32_t far = gap <= 0 ? n.right : n.left;
    nearest_rec(near, q, best);
    if (!(gap * gap > best.second)) nearest_rec(far, q, best);
  }

  void knn_rec(std::int32_t ni, const Point& q, std::size_t k,
               std::priority_queue<std::pair<double, std::uint32_t>>& heap) const {
    const Node& n = nodes_[ni];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::pair<double, std::uint32_t> cand{squared_distance(entries_[i].p, q),
                                                        entries_[i].id};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    const double gap = q[n.dim] - n.split;
    const std::int32_t near = gap <= 0 ? n.left : n.right;
    const std::int32_t far = gap <= 0 ? n.right : n.left;
    knn_rec(near, q, k, heap);
    if (heap.size() < k || !(gap * gap > heap.top().first)) knn_rec(far, q, k, heap);
  }

  struct Entry {
    Point p;
    std::uint32_t id;
  };

  std::vector<Entry> entries_;
  std::vector<Node> nodes_;
};

}  // namespace terrapath
