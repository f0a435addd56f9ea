#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshstyle/geometry.hpp"
#include "meshstyle/mesh.hpp"

namespace meshstyle {

// Surface samples with per-point part labels. source_face is -1 for
// points that did not originate from a mesh face (ellipsoid samples).
struct LabeledPointSet {
  std::vector<Vec3> points;
  std::vector<int> labels;
  std::vector<int> source_face;
  std::vector<std::string> part_names;

  int part_count() const { return int(part_names.size()); }
  std::size_t size() const { return points.size(); }
  std::vector<Vec3> points_of_part(int part) const;
};

// Area-proportional face selection with uniform barycentric placement.
// Deterministic for a given seed.
LabeledPointSet sample_surface(const TexturedMesh& mesh, const PartLabeling& labels, int n,
                               std::uint64_t seed);

}  // namespace meshstyle
