#include "meshstyle/nn_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace meshstyle {

namespace {

constexpr int kLeafSize = 8;

double pair_distance(const Vec3& a, const Vec3& b, Metric metric) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  if (metric == Metric::l1) return std::abs(dx) + std::abs(dy) + std::abs(dz);
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

NnIndex::NnIndex(std::span<const Vec3> points, Metric metric)
    : points_(points.begin(), points.end()), metric_(metric) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, int(points_.size()), bounds_of(points_));
  }
}

int NnIndex::build(int begin, int end, Bbox3 box) {
  const int id = int(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  const Vec3 extent = box.hi - box.lo;
  int axis = 0;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];

  Bbox3 left_box, right_box;
  for (int i = begin; i < mid; ++i) left_box.expand(points_[order_[i]]);
  for (int i = mid; i < end; ++i) right_box.expand(points_[order_[i]]);

  nodes_[id].axis = axis;
  nodes_[id].split = split;
  const int left = build(begin, mid, left_box);
  const int right = build(mid, end, right_box);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NnIndex::search(int node, const Vec3& query, Result& best) const {
  const Node& n = nodes_[node];
  if (n.left < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      const double d = pair_distance(query, points_[idx], metric_);
      // best.index < 0 keeps the tie rule total when every distance is
      // infinite (overflowed coordinates); the sentinel must not win ties.
      if (d < best.distance || (d == best.distance && (best.index < 0 || idx < best.index))) {
        best.distance = d;
        best.index = idx;
      }
    }
    return;
  }

  const double diff = query[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, query, best);

  // The far side can only be skipped when every point there is strictly
  // farther than the current best; ties must still be visited so the
  // lowest-index winner matches a brute-force scan.
  const double bound = metric_ == Metric::l1 ? std::abs(diff) : diff * diff;
  if (bound <= best.distance) search(far, query, best);
}

NnIndex::Result NnIndex::nearest(const Vec3& query) const {
  Result best;
  best.distance = std::numeric_limits<double>::infinity();
  if (root_ < 0) return best;
  search(root_, query, best);
  return best;
}

}  // namespace meshstyle
