#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "meshstyle/geometry.hpp"
#include "meshstyle/image.hpp"

namespace meshstyle {

struct Face {
  std::array<int, 3> v{{-1, -1, -1}};
  // Per-corner uv indices, -1 when the face carries no texture coordinates.
  std::array<int, 3> uv{{-1, -1, -1}};

  bool has_uv() const { return uv[0] >= 0 && uv[1] >= 0 && uv[2] >= 0; }
};

// Triangle mesh with optional texture coordinates. May be non-manifold,
// non-watertight and multi-component; faces are non-degenerate after
// load-time cleanup.
struct TexturedMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec2> uvs;
  std::vector<Face> faces;
  std::shared_ptr<const TextureImage> texture;

  bool has_uvs() const;
  Bbox3 bounds() const;
  double face_area(int f) const {
    const Face& face = faces[f];
    return triangle_area(vertices[face.v[0]], vertices[face.v[1]], vertices[face.v[2]]);
  }
};

// Per-face semantic part ids over an ordered part alphabet.
struct PartLabeling {
  std::vector<std::string> part_names;
  std::vector<int> face_part;

  int part_count() const { return int(part_names.size()); }
};

// Throws data_error if any face index is out of range.
void validate_mesh(const TexturedMesh& mesh);

// Throws data_error if the labeling is inconsistent with the mesh.
void validate_labels(const PartLabeling& labels, const TexturedMesh& mesh);

// Removes faces with repeated vertex indices or zero area. Returns the
// number of faces removed. Idempotent.
std::size_t clean_degenerate_faces(TexturedMesh& mesh);

}  // namespace meshstyle
