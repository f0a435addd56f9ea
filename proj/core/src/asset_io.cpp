#include "meshstyle/asset_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "meshstyle/errors.hpp"
#include "json_util.hpp"

namespace meshstyle {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& what) {
  throw data_error(path.string() + ": line " + std::to_string(line) + ": " + what);
}

// Resolves a 1-based (or negative, relative) obj index against the count
// seen so far. Returns -1 for an empty field.
int resolve_index(std::string_view field, int count) {
  if (field.empty()) return -1;
  int value = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) return -2;
  if (value > 0) return value - 1;
  if (value < 0) return count + value;
  return -2;  // index 0 is invalid in obj
}

struct FaceCorner {
  int v = -1;
  int uv = -1;
};

}  // namespace

TexturedMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open mesh file: " + path.string());

  TexturedMesh mesh;
  std::string line;
  int line_no = 0;
  std::vector<FaceCorner> corners;  // reused per face record

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;

    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) parse_fail(path, line_no, "malformed vertex record");
      mesh.vertices.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(ls >> t.x() >> t.y())) parse_fail(path, line_no, "malformed texture coordinate record");
      mesh.uvs.push_back(t);
    } else if (tag == "f") {
      corners.clear();
      std::string entry;
      while (ls >> entry) {
        // Accept v, v/vt, v/vt/vn and v//vn; normals are ignored.
        const auto s1 = entry.find('/');
        const auto s2 = s1 == std::string::npos ? std::string::npos : entry.find('/', s1 + 1);
        std::string_view vf(entry);
        std::string_view vfield = s1 == std::string::npos ? vf : vf.substr(0, s1);
        std::string_view tfield =
            s1 == std::string::npos
                ? std::string_view{}
                : vf.substr(s1 + 1, (s2 == std::string::npos ? vf.size() : s2) - s1 - 1);
        FaceCorner corner;
        corner.v = resolve_index(vfield, int(mesh.vertices.size()));
        corner.uv = resolve_index(tfield, int(mesh.uvs.size()));
        if (corner.v < 0 || corner.uv == -2) {
          parse_fail(path, line_no, "malformed face entry \"" + entry + "\"");
        }
        corners.push_back(corner);
      }
      if (corners.size() < 3) parse_fail(path, line_no, "face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        Face face;
        face.v = {corners[0].v, corners[k].v, corners[k + 1].v};
        face.uv = {corners[0].uv, corners[k].uv, corners[k + 1].uv};
        mesh.faces.push_back(face);
      }
    }
    // Other records (vn, o, g, s, usemtl, mtllib) are ignored.
  }

  try {
    validate_mesh(mesh);
  } catch (const data_error& e) {
    throw data_error(path.string() + ": " + e.what());
  }

  const std::size_t dropped = clean_degenerate_faces(mesh);
  if (dropped > 0) {
    warn(path.string() + ": dropped " + std::to_string(dropped) + " degenerate face(s)");
  }
  if (mesh.faces.empty()) {
    throw data_error(path.string() + ": no faces remain after cleanup");
  }
  return mesh;
}

void save_mesh(const TexturedMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write mesh file: " + path.string());
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.uvs) {
    std::snprintf(buf, sizeof buf, "vt %.9g %.9g\n", t.x(), t.y());
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    if (f.has_uv()) {
      std::snprintf(buf, sizeof buf, "f %d/%d %d/%d %d/%d\n", f.v[0] + 1, f.uv[0] + 1,
                    f.v[1] + 1, f.uv[1] + 1, f.v[2] + 1, f.uv[2] + 1);
    } else {
      std::snprintf(buf, sizeof buf, "f %d %d %d\n", f.v[0] + 1, f.v[1] + 1, f.v[2] + 1);
    }
    out << buf;
  }
  if (!out) throw io_error("failed writing mesh file: " + path.string());
}

TextureImage load_texture(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw io_error("cannot read png: " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw io_error("cannot decode png: " + path.string() + ": " + msg);
  }

  TextureImage image;
  image.width = int(png.width);
  image.height = int(png.height);
  image.pixels.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) image.pixels[i] = bytes[i] / 255.0;
  if (image.width < 1 || image.height < 1) {
    throw data_error("empty texture image: " + path.string());
  }
  return image;
}

void save_texture(const TextureImage& image, const std::filesystem::path& path) {
  if (image.width < 1 || image.height < 1) throw data_error("cannot save empty texture");
  std::vector<std::uint8_t> bytes(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    bytes[i] = std::uint8_t(std::lround(v * 255.0));
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = png_uint_32(image.width);
  png.height = png_uint_32(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw io_error("cannot write png: " + path.string() + ": " + png.message);
  }
}

PartLabeling load_part_labels(const std::filesystem::path& path, const TexturedMesh& mesh) {
  const Json doc = load_json_file(path);
  if (!doc.is_object() || !doc.contains("parts") || !doc.contains("face_part")) {
    throw data_error(path.string() + ": label file needs \"parts\" and \"face_part\" arrays");
  }

  PartLabeling labels;
  for (const auto& name : doc.at("parts")) {
    if (!name.is_string()) throw data_error(path.string() + ": part names must be strings");
    labels.part_names.push_back(name.get<std::string>());
  }
  if (labels.part_names.empty()) throw data_error(path.string() + ": empty part alphabet");

  const auto& fp = doc.at("face_part");
  if (!fp.is_array()) throw data_error(path.string() + ": \"face_part\" must be an array");
  if (fp.size() > mesh.faces.size()) {
    throw data_error(path.string() + ": labeling covers " + std::to_string(fp.size()) +
                     " faces, mesh has " + std::to_string(mesh.faces.size()));
  }
  if (fp.size() < mesh.faces.size()) {
    std::string missing = std::to_string(fp.size());
    if (fp.size() + 1 < mesh.faces.size()) {
      missing += ".." + std::to_string(mesh.faces.size() - 1);
    }
    throw data_error(path.string() + ": faces " + missing + " are unlabeled");
  }
  for (std::size_t f = 0; f < fp.size(); ++f) {
    if (!fp[f].is_number_integer()) {
      throw data_error(path.string() + ": face_part[" + std::to_string(f) + "] is not an integer");
    }
    const int p = fp[f].get<int>();
    if (p < 0 || p >= labels.part_count()) {
      throw data_error(path.string() + ": face " + std::to_string(f) +
                       " labeled with unknown part index " + std::to_string(p));
    }
    labels.face_part.push_back(p);
  }
  return labels;
}

void save_part_labels(const PartLabeling& labels, const std::filesystem::path& path) {
  Json doc;
  doc["parts"] = labels.part_names;
  doc["face_part"] = labels.face_part;
  save_json_file(doc, path);
}

Json config_to_json(const RunConfig& c) {
  Json doc;
  doc["lambda"] = c.lambda;
  doc["alpha"] = c.alpha;
  doc["beta"] = c.beta;
  doc["gamma"] = c.gamma;
  doc["sample_count"] = c.sample_count;
  doc["ellipsoid_surface_samples"] = c.ellipsoid_surface_samples;
  doc["views"] = c.views;
  doc["elevation_deg"] = c.elevation_deg;
  doc["image_resolution"] = c.image_resolution;
  doc["geo_iters"] = c.geo_iters;
  doc["joint_steps"] = c.joint_steps;
  doc["correspondence_refresh"] = c.correspondence_refresh;
  doc["fscore_tau_fraction"] = c.fscore_tau_fraction;
  doc["symmetry_plane"] = c.symmetry_plane;
  doc["random_seed"] = c.random_seed;
  return doc;
}

RunConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw data_error("config document must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "gamma") c.gamma = value.get<double>();
      else if (key == "sample_count") c.sample_count = value.get<int>();
      else if (key == "ellipsoid_surface_samples") c.ellipsoid_surface_samples = value.get<int>();
      else if (key == "views") c.views = value.get<int>();
      else if (key == "elevation_deg") c.elevation_deg = value.get<double>();
      else if (key == "image_resolution") c.image_resolution = value.get<int>();
      else if (key == "geo_iters") c.geo_iters = value.get<int>();
      else if (key == "joint_steps") c.joint_steps = value.get<int>();
      else if (key == "correspondence_refresh") c.correspondence_refresh = value.get<int>();
      else if (key == "fscore_tau_fraction") c.fscore_tau_fraction = value.get<double>();
      else if (key == "symmetry_plane") c.symmetry_plane = value.get<std::string>();
      else if (key == "random_seed") c.random_seed = value.get<std::uint64_t>();
      else throw data_error("unknown config key \"" + key + "\"");
    } catch (const Json::exception& e) {
      throw data_error("config key \"" + key + "\": " + e.what());
    }
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return config_from_json(load_json_file(path));
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  save_json_file(config_to_json(config), path);
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

void save_json_file(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw io_error("failed writing file: " + path.string());
}

}  // namespace meshstyle
