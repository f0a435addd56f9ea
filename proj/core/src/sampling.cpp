#include "meshstyle/sampling.hpp"

#include <algorithm>
#include <random>

#include "meshstyle/errors.hpp"

namespace meshstyle {

namespace {

double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Vec3> LabeledPointSet::points_of_part(int part) const {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] == part) out.push_back(points[i]);
  }
  return out;
}

LabeledPointSet sample_surface(const TexturedMesh& mesh, const PartLabeling& labels, int n,
                               std::uint64_t seed) {
  if (n < 1) throw data_error("sample_surface: need at least one sample");
  if (mesh.faces.empty()) throw data_error("sample_surface: empty mesh");
  validate_labels(labels, mesh);

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(int(f));
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw data_error("sample_surface: mesh has zero total area");

  LabeledPointSet out;
  out.points.reserve(n);
  out.labels.reserve(n);
  out.source_face.reserve(n);
  out.part_names = labels.part_names;

  std::mt19937_64 rng(seed);
  for (int k = 0; k < n; ++k) {
    const double pick = uniform01(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const int f = int(std::min<std::size_t>(it - cumulative.begin(), mesh.faces.size() - 1));

    double u = uniform01(rng);
    double v = uniform01(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Face& face = mesh.faces[f];
    const Vec3& a = mesh.vertices[face.v[0]];
    const Vec3& b = mesh.vertices[face.v[1]];
    const Vec3& c = mesh.vertices[face.v[2]];
    out.points.push_back(a + u * (b - a) + v * (c - a));
    out.labels.push_back(labels.face_part[f]);
    out.source_face.push_back(f);
  }
  return out;
}

}  // namespace meshstyle
