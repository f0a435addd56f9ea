#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "meshstyle/config.hpp"
#include "meshstyle/errors.hpp"
#include "meshstyle/mesh.hpp"
#include "meshstyle/part_field.hpp"
#include "meshstyle/render.hpp"
#include "meshstyle/sampling.hpp"
#include "meshstyle/texture_style.hpp"
#include "meshstyle/warp.hpp"

namespace meshstyle {

// One side of a transfer: a mesh (optionally textured) with part labels.
struct StyleAsset {
  TexturedMesh mesh;
  PartLabeling labels;
};

// Geometric initialization: sample both shapes, fit and refine the source
// part ellipsoids, then optimize the per-part affines.
struct GeometryPhaseResult {
  std::vector<Ellipsoid> ellipsoids;
  LabeledPointSet source_samples;  // seeded with cfg.random_seed
  LabeledPointSet target_samples;  // seeded with cfg.random_seed + 1
  OptimizeResult optimized;
  TexturedMesh warped_mesh;
};

GeometryPhaseResult run_geometry_phase(const StyleAsset& source, const StyleAsset& target,
                                       const RunConfig& cfg);

// Fit per-part ellipsoids to the samples and polish them by coordinate
// descent against the sampled shape.
std::vector<Ellipsoid> fit_refined_ellipsoids(const LabeledPointSet& samples,
                                              const RunConfig& cfg);

// Closed-form color initialization from UV-coverage-masked texture moments.
struct TexturePhaseResult {
  BoolImage source_coverage;
  ColorStats source_stats;
  ColorStats target_stats;
  ColorTransform transform;
  TextureImage stylized_texture;
};

TexturePhaseResult run_texture_phase(const StyleAsset& source, const StyleAsset& target);

// Per-step record of the joint objective: the geometric term plus the
// weighted render-space terms.
struct LedgerEntry {
  int step = 0;
  double geometric = 0.0;
  double weighted_content = 0.0;  // beta * content term
  double weighted_style = 0.0;    // gamma * style term
  double total = 0.0;
};

// Raised when the joint loop hits a non-finite loss; carries the progress
// ledger for diagnostics.
struct stylize_abort : numeric_error {
  std::vector<LedgerEntry> ledger;
  stylize_abort(const std::string& message, std::vector<LedgerEntry> entries)
      : numeric_error(message), ledger(std::move(entries)) {}
};

struct StylizeResult {
  TexturedMesh mesh;  // best-iterate warped mesh, stylized texture attached
  TextureImage stylized_texture;
  PartTransforms transforms;
  ColorTransform color;
  std::vector<LedgerEntry> ledger;
  GeometryPhaseResult geometry;
  TexturePhaseResult texture;
};

// Joint loop: geometric initialization, whitening-coloring color
// initialization, then alternating per-step updates of the color transform
// (analytic gradients through masked render statistics) and the affines
// (frozen-correspondence gradients). Returns the best-total iterate. With
// beta = gamma = 0 the render-space machinery is inert and the result is
// exactly the composition of the two initializations.
StylizeResult stylize_joint(const StyleAsset& source, const StyleAsset& target,
                            const RunConfig& cfg);

// Reproducibility record written next to every command's outputs.
struct RunManifest {
  std::string tool_version;
  std::string command;
  RunConfig config;
  std::vector<std::pair<std::string, std::string>> input_digests;  // label -> sha256
  std::vector<std::pair<std::string, double>> timings;             // phase -> seconds
};

std::string sha256_file_hex(const std::filesystem::path& path);

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
void save_ellipsoids(std::span<const Ellipsoid> ells, std::span<const std::string> part_names,
                     const std::filesystem::path& path);
void save_transforms(const PartTransforms& transforms, std::span<const std::string> part_names,
                     const std::filesystem::path& path);
void save_trace(const OptimizerTrace& trace, const std::filesystem::path& path);
void save_color_transform(const ColorTransform& transform, const std::filesystem::path& path);
void save_ledger(std::span<const LedgerEntry> ledger, const std::filesystem::path& path);

}  // namespace meshstyle
