#include "support/fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace testsupport {

namespace {

using meshstyle::Face;

void add_box(TexturedMesh& mesh, const Vec3& center, const Vec3& half) {
  const int base = int(mesh.vertices.size());
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner(i & 1 ? half.x() : -half.x(), i & 2 ? half.y() : -half.y(),
                      i & 4 ? half.z() : -half.z());
    mesh.vertices.push_back(center + corner);
  }
  static const int quads[6][4] = {
      {0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1}, {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3},
  };
  for (const auto& q : quads) {
    mesh.faces.push_back(Face{{base + q[0], base + q[1], base + q[2]}});
    mesh.faces.push_back(Face{{base + q[0], base + q[2], base + q[3]}});
  }
}

}  // namespace

TexturedMesh make_cube(double size, const Vec3& center) {
  TexturedMesh mesh;
  add_box(mesh, center, Vec3::Constant(0.5 * size));
  return mesh;
}

TexturedMesh make_unit_square() {
  TexturedMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  mesh.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  Face a{{0, 1, 2}};
  a.uv = {0, 1, 2};
  Face b{{0, 2, 3}};
  b.uv = {0, 2, 3};
  mesh.faces = {a, b};
  return mesh;
}

TexturedMesh make_uv_sphere(int stacks, int slices, double radius, const Vec3& center) {
  TexturedMesh mesh;
  mesh.vertices.push_back(center + Vec3(0, radius, 0));
  for (int i = 1; i < stacks; ++i) {
    const double theta = M_PI * double(i) / double(stacks);
    for (int j = 0; j < slices; ++j) {
      const double phi = 2.0 * M_PI * double(j) / double(slices);
      mesh.vertices.push_back(
          center + radius * Vec3(std::sin(theta) * std::cos(phi), std::cos(theta),
                                 std::sin(theta) * std::sin(phi)));
    }
  }
  mesh.vertices.push_back(center + Vec3(0, -radius, 0));
  const int south = int(mesh.vertices.size()) - 1;
  auto ring = [&](int i, int j) { return 1 + (i - 1) * slices + (j % slices); };

  for (int j = 0; j < slices; ++j)
    mesh.faces.push_back(Face{{0, ring(1, j + 1), ring(1, j)}});
  for (int i = 1; i + 1 < stacks; ++i)
    for (int j = 0; j < slices; ++j) {
      const int a = ring(i, j), b = ring(i, j + 1);
      const int c = ring(i + 1, j + 1), d = ring(i + 1, j);
      mesh.faces.push_back(Face{{a, b, c}});
      mesh.faces.push_back(Face{{a, c, d}});
    }
  for (int j = 0; j < slices; ++j)
    mesh.faces.push_back(Face{{ring(stacks - 1, j), ring(stacks - 1, j + 1), south}});
  return mesh;
}

PartedMesh make_parted_mesh(int parts, std::uint64_t seed, bool with_uvs) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  std::uniform_real_distribution<double> extent(0.35, 0.65);

  PartedMesh out;
  const int grid = int(std::ceil(std::sqrt(double(parts))));
  for (int k = 0; k < parts; ++k) {
    const Vec3 center(2.2 * k, jitter(rng), jitter(rng));
    const Vec3 half(extent(rng), extent(rng), extent(rng));
    const int face_base = int(out.mesh.faces.size());
    add_box(out.mesh, center, half);

    if (with_uvs) {
      // Each part's 12 faces get disjoint uv triangles inside the part's
      // atlas cell: a 4x4 block of sub-cells with a safety margin.
      const double cell = 1.0 / grid;
      const double cu = (k % grid) * cell;
      const double cv = (k / grid) * cell;
      const double sub = cell / 4.0;
      for (int f = 0; f < 12; ++f) {
        const double ou = cu + (f % 4) * sub + 0.15 * sub;
        const double ov = cv + (f / 4) * sub + 0.15 * sub;
        const int uv_base = int(out.mesh.uvs.size());
        out.mesh.uvs.push_back({ou, ov});
        out.mesh.uvs.push_back({ou + 0.7 * sub, ov});
        out.mesh.uvs.push_back({ou, ov + 0.7 * sub});
        Face& face = out.mesh.faces[face_base + f];
        face.uv = {uv_base, uv_base + 1, uv_base + 2};
      }
    }

    out.labels.part_names.push_back("part" + std::to_string(k));
    for (int f = 0; f < 12; ++f) out.labels.face_part.push_back(k);
  }
  return out;
}

TextureImage make_noise_texture(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.5, 4.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> amp(0.05, 0.12);

  struct Wave {
    double fu, fv, ph, am;
  };
  Wave waves[3][3];
  for (auto& channel : waves)
    for (Wave& wv : channel) wv = {freq(rng), freq(rng), phase(rng), amp(rng)};

  TextureImage img = TextureImage::filled(w, h, Vec3::Constant(0.5));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = 0.5;
        for (const Wave& wv : waves[c])
          v += wv.am * std::sin(2.0 * M_PI * (wv.fu * x / w + wv.fv * y / h) + wv.ph);
        img.at(x, y, c) = std::min(1.0, std::max(0.0, v));
      }
  return img;
}

std::vector<Vec3> random_points(int n, std::uint64_t seed, double scale, const Vec3& center) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> out(n);
  for (Vec3& p : out) p = center + scale * Vec3(u(rng), u(rng), u(rng));
  return out;
}

LabeledPointSet random_labeled(int n, int parts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> part(0, parts - 1);
  LabeledPointSet out;
  for (int k = 0; k < parts; ++k) out.part_names.push_back("p" + std::to_string(k));
  out.points.resize(n);
  out.labels.resize(n);
  out.source_face.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    out.points[i] = Vec3(u(rng), u(rng), u(rng));
    out.labels[i] = part(rng);
  }
  return out;
}

// -- oracles ---------------------------------------------------------------
// These mirror the documented formulas with plain quadratic scans and the
// same evaluation order as the library, so comparisons can be exact.

namespace {

double l1_dist(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::abs(dx) + std::abs(dy) + std::abs(dz);
}

double l2_sq_dist(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

template <class Dist>
double brute_min(const Vec3& query, std::span<const Vec3> pts, Dist dist) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : pts) {
    const double d = dist(query, p);
    if (d < best) best = d;
  }
  return best;
}

template <class Dist>
double brute_mean_nearest(std::span<const Vec3> queries, std::span<const Vec3> pts, Dist dist) {
  double sum = 0.0;
  for (const Vec3& q : queries) sum += brute_min(q, pts, dist);
  return sum / double(queries.size());
}

template <class Dist>
double brute_chamfer(std::span<const Vec3> p, std::span<const Vec3> q, Dist dist) {
  return 0.5 * (brute_mean_nearest(p, q, dist) + brute_mean_nearest(q, p, dist));
}

std::vector<Vec3> part_points(const LabeledPointSet& set, int part) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set.labels[i] == part) out.push_back(set.points[i]);
  return out;
}

}  // namespace

double brute_chamfer_l1(std::span<const Vec3> p, std::span<const Vec3> q) {
  return brute_chamfer(p, q, l1_dist);
}

double brute_chamfer_l2(std::span<const Vec3> p, std::span<const Vec3> q) {
  return brute_chamfer(p, q, l2_sq_dist);
}

double brute_part_distance(const LabeledPointSet& p, const LabeledPointSet& q) {
  double total = brute_chamfer_l1(p.points, q.points);
  for (int part = 0; part < p.part_count(); ++part) {
    const std::vector<Vec3> pi = part_points(p, part);
    const std::vector<Vec3> qi = part_points(q, part);
    if (pi.empty() && qi.empty()) continue;
    if (pi.empty())
      total += brute_mean_nearest(qi, p.points, l1_dist);
    else if (qi.empty())
      total += brute_mean_nearest(pi, q.points, l1_dist);
    else
      total += brute_chamfer(pi, qi, l1_dist);
  }
  return total;
}

double brute_symmetry_distance(std::span<const Vec3> p, const SymmetryPlane& plane) {
  std::vector<Vec3> reflected(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) reflected[i] = plane.reflect(p[i]);
  return brute_chamfer(p, std::span<const Vec3>(reflected), l1_dist);
}

double brute_f_score(std::span<const Vec3> p, std::span<const Vec3> q, double tau) {
  const double tau_sq = tau * tau;
  auto hit_fraction = [&](std::span<const Vec3> queries, std::span<const Vec3> pts) {
    std::size_t hits = 0;
    for (const Vec3& query : queries)
      if (brute_min(query, pts, l2_sq_dist) <= tau_sq) ++hits;
    return double(hits) / double(queries.size());
  };
  const double precision = hit_fraction(p, q);
  const double recall = hit_fraction(q, p);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

// -- scratch dirs ----------------------------------------------------------

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  const unsigned id = counter.fetch_add(1);
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("meshstyle_test_" + std::to_string(rd()) + "_" + std::to_string(id));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return std::vector<unsigned char>(text.begin(), text.end());
}

}  // namespace testsupport
