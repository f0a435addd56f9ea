#include "meshstyle/geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "meshstyle/errors.hpp"

namespace meshstyle {

Bbox3 bounds_of(std::span<const Vec3> points) {
  Bbox3 box;
  for (const auto& p : points) box.expand(p);
  return box;
}

SymmetryPlane make_symmetry_plane(const Vec3& normal, double offset) {
  const double len = normal.norm();
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw data_error("symmetry plane normal must be nonzero and finite");
  }
  SymmetryPlane plane;
  if (std::abs(len - 1.0) > 1e-12) {
    warn("symmetry plane normal not unit length; normalizing");
    plane.normal = normal / len;
    plane.offset = offset / len;
  } else {
    plane.normal = normal;
    plane.offset = offset;
  }
  return plane;
}

SymmetryPlane parse_symmetry_plane(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw data_error("symmetry plane must look like \"x=0\": got \"" + text + "\"");
  }
  std::string axis = text.substr(0, eq);
  // Trim surrounding spaces.
  while (!axis.empty() && axis.back() == ' ') axis.pop_back();
  while (!axis.empty() && axis.front() == ' ') axis.erase(axis.begin());

  Vec3 normal;
  if (axis == "x") {
    normal = Vec3::UnitX();
  } else if (axis == "y") {
    normal = Vec3::UnitY();
  } else if (axis == "z") {
    normal = Vec3::UnitZ();
  } else {
    throw data_error("symmetry plane axis must be x, y or z: got \"" + text + "\"");
  }

  const std::string value = text.substr(eq + 1);
  char* end = nullptr;
  const double offset = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || !std::isfinite(offset)) {
    throw data_error("symmetry plane offset is not a number: \"" + text + "\"");
  }
  SymmetryPlane plane;
  plane.normal = normal;
  plane.offset = offset;
  return plane;
}

}  // namespace meshstyle
