#pragma once

#include <Eigen/Dense>

#include <limits>
#include <span>
#include <string>

namespace meshstyle {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Bbox3 {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return lo.x() > hi.x(); }
  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void merge(const Bbox3& other) {
    lo = lo.cwiseMin(other.lo);
    hi = hi.cwiseMax(other.hi);
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return empty() ? 0.0 : (hi - lo).norm(); }
};

Bbox3 bounds_of(std::span<const Vec3> points);

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

// Plane {x : normal . x = offset}. Stored normal is unit length.
struct SymmetryPlane {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;

  Vec3 reflect(const Vec3& p) const {
    return p - 2.0 * (normal.dot(p) - offset) * normal;
  }
  // Reflection as the affine map x -> H x + h.
  Mat3 linear_part() const {
    return Mat3::Identity() - 2.0 * normal * normal.transpose();
  }
  Vec3 affine_part() const { return 2.0 * offset * normal; }
};

// Builds a plane from an arbitrary normal, normalizing (with a warning)
// when it is not unit length.
SymmetryPlane make_symmetry_plane(const Vec3& normal, double offset);

// Parses the config form "x=0", "y=1.25", "z=-3".
SymmetryPlane parse_symmetry_plane(const std::string& text);

}  // namespace meshstyle
