#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "meshstyle/geometry.hpp"

namespace meshstyle {

enum class Metric { l1, l2 };

// Exact nearest-neighbor search over a fixed point set.
//
// Distances are the L1 norm for Metric::l1 and the *squared* Euclidean norm
// for Metric::l2. Queries return the same point a brute-force scan in index
// order would: ties resolve to the lowest original index.
class NnIndex {
 public:
  struct Result {
    int index = -1;
    double distance = 0.0;
  };

  NnIndex(std::span<const Vec3> points, Metric metric);

  Result nearest(const Vec3& query) const;
  std::size_t size() const { return points_.size(); }
  Metric metric() const { return metric_; }

 private:
  struct Node {
    int left = -1;    // child node, -1 for leaf
    int right = -1;
    int axis = 0;
    double split = 0.0;
    int begin = 0;    // range into order_ (leaves only)
    int end = 0;
  };

  int build(int begin, int end, Bbox3 box);
  void search(int node, const Vec3& query, Result& best) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  Metric metric_;
  int root_ = -1;
};

}  // namespace meshstyle
