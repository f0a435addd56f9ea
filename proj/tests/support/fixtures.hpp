#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "meshstyle/geometry.hpp"
#include "meshstyle/mesh.hpp"
#include "meshstyle/sampling.hpp"

namespace testsupport {

using meshstyle::LabeledPointSet;
using meshstyle::PartLabeling;
using meshstyle::SymmetryPlane;
using meshstyle::TexturedMesh;
using meshstyle::TextureImage;
using meshstyle::Vec3;

// -- mesh fixtures ---------------------------------------------------------

TexturedMesh make_cube(double size = 1.0, const Vec3& center = Vec3::Zero());
TexturedMesh make_unit_square();  // two triangles in z=0 with matching uvs
TexturedMesh make_uv_sphere(int stacks, int slices, double radius = 1.0,
                            const Vec3& center = Vec3::Zero());

// Multi-part fixture: `parts` jittered boxes spread along x, one part per
// box, each box's faces mapped into its own cell of a UV atlas grid.
struct PartedMesh {
  TexturedMesh mesh;
  PartLabeling labels;
};
PartedMesh make_parted_mesh(int parts, std::uint64_t seed, bool with_uvs = true);

// -- texture fixtures ------------------------------------------------------

// Smooth sinusoid mixture, distinct per seed, full-rank channel covariance.
TextureImage make_noise_texture(int w, int h, std::uint64_t seed);

// -- random point sets -----------------------------------------------------

std::vector<Vec3> random_points(int n, std::uint64_t seed, double scale = 1.0,
                                const Vec3& center = Vec3::Zero());
LabeledPointSet random_labeled(int n, int parts, std::uint64_t seed);

// -- brute-force metric oracles (quadratic scans, index order) -------------

double brute_chamfer_l1(std::span<const Vec3> p, std::span<const Vec3> q);
double brute_chamfer_l2(std::span<const Vec3> p, std::span<const Vec3> q);
double brute_part_distance(const LabeledPointSet& p, const LabeledPointSet& q);
double brute_symmetry_distance(std::span<const Vec3> p, const SymmetryPlane& plane);
double brute_f_score(std::span<const Vec3> p, std::span<const Vec3> q, double tau);

// -- filesystem scratch space ----------------------------------------------

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
std::vector<unsigned char> read_bytes(const std::filesystem::path& path);

}  // namespace testsupport
