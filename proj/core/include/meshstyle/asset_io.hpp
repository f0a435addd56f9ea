#pragma once

#include <filesystem>
#include <string>

#include "meshstyle/config.hpp"
#include "meshstyle/image.hpp"
#include "meshstyle/mesh.hpp"

namespace meshstyle {

// Wavefront-style ASCII geometry: v / vt / f records, 1-based indices,
// "v/vt" face entries. Convex polygons are fan-triangulated; degenerate
// faces are dropped with a warning. Throws io_error when the file cannot
// be opened and data_error (with a line number) on malformed records or
// when no faces survive cleanup.
TexturedMesh load_mesh(const std::filesystem::path& path);

// Writes positions and uvs with 9 significant digits.
void save_mesh(const TexturedMesh& mesh, const std::filesystem::path& path);

// 8-bit RGB(A) PNG; alpha is ignored on read, channels are mapped to
// [0,1] doubles in memory and clamped back to 8-bit on write.
TextureImage load_texture(const std::filesystem::path& path);
void save_texture(const TextureImage& image, const std::filesystem::path& path);

// JSON document with a "parts" name array and a "face_part" index array.
PartLabeling load_part_labels(const std::filesystem::path& path, const TexturedMesh& mesh);
void save_part_labels(const PartLabeling& labels, const std::filesystem::path& path);

// JSON object whose keys mirror the RunConfig field names. Missing keys
// keep their defaults; unknown keys are an error.
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace meshstyle
