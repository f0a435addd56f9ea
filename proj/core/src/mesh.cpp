#include "meshstyle/mesh.hpp"

#include <algorithm>

#include "meshstyle/errors.hpp"

namespace meshstyle {

bool TexturedMesh::has_uvs() const {
  if (uvs.empty() || faces.empty()) return false;
  return std::all_of(faces.begin(), faces.end(), [](const Face& f) { return f.has_uv(); });
}

Bbox3 TexturedMesh::bounds() const {
  Bbox3 box;
  for (const auto& v : vertices) box.expand(v);
  return box;
}

void validate_mesh(const TexturedMesh& mesh) {
  const int nv = int(mesh.vertices.size());
  const int nt = int(mesh.uvs.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (face.v[k] < 0 || face.v[k] >= nv) {
        throw data_error("face " + std::to_string(f) + " references vertex " +
                         std::to_string(face.v[k]) + " of " + std::to_string(nv));
      }
      if (face.uv[k] >= nt) {
        throw data_error("face " + std::to_string(f) + " references uv " +
                         std::to_string(face.uv[k]) + " of " + std::to_string(nt));
      }
    }
  }
}

void validate_labels(const PartLabeling& labels, const TexturedMesh& mesh) {
  if (labels.face_part.size() != mesh.faces.size()) {
    throw data_error("labeling covers " + std::to_string(labels.face_part.size()) +
                     " faces, mesh has " + std::to_string(mesh.faces.size()));
  }
  for (std::size_t f = 0; f < labels.face_part.size(); ++f) {
    const int p = labels.face_part[f];
    if (p < 0 || p >= labels.part_count()) {
      throw data_error("face " + std::to_string(f) + " labeled with unknown part index " +
                       std::to_string(p));
    }
  }
}

std::size_t clean_degenerate_faces(TexturedMesh& mesh) {
  std::vector<Face> kept;
  kept.reserve(mesh.faces.size());
  for (const Face& face : mesh.faces) {
    if (face.v[0] == face.v[1] || face.v[1] == face.v[2] || face.v[0] == face.v[2]) continue;
    const Vec3& a = mesh.vertices[face.v[0]];
    const Vec3& b = mesh.vertices[face.v[1]];
    const Vec3& c = mesh.vertices[face.v[2]];
    if ((b - a).cross(c - a).squaredNorm() <= 0.0) continue;
    kept.push_back(face);
  }
  const std::size_t removed = mesh.faces.size() - kept.size();
  mesh.faces = std::move(kept);
  return removed;
}

}  // namespace meshstyle
