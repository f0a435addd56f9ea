#include "meshstyle/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "json_util.hpp"
#include "meshstyle/metrics.hpp"
#include "meshstyle/version.hpp"

namespace meshstyle {

namespace {

constexpr int kRefineIterations = 20;
constexpr double kGeometryRate = 0.01;
constexpr double kColorRate = 0.02;
const Vec3 kLuminance(0.299, 0.587, 0.114);

struct AdamState {
  std::vector<double> m, v;
  double rate;
  int step = 0;

  AdamState(std::size_t n, double rate) : m(n, 0.0), v(n, 0.0), rate(rate) {}

  void update(std::vector<double>& x, const std::vector<double>& g) {
    ++step;
    const double bc1 = 1.0 - std::pow(0.9, double(step));
    const double bc2 = 1.0 - std::pow(0.999, double(step));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      x[i] -= rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
    }
  }
};

std::vector<double> color_to_vector(const ColorTransform& t) {
  std::vector<double> out(12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[3 * r + c] = t.linear(r, c);
  for (int r = 0; r < 3; ++r) out[9 + r] = t.bias[r];
  return out;
}

ColorTransform vector_to_color(const std::vector<double>& v) {
  ColorTransform t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.linear(r, c) = v[3 * r + c];
  for (int r = 0; r < 3; ++r) t.bias[r] = v[9 + r];
  return t;
}

bool all_finite(const std::vector<double>& v) {
  for (const double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Rethrows input/data errors with a phase tag, per the pipeline contract.
template <class F>
auto tagged_phase(const char* tag, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const io_error& e) {
    throw io_error(std::string(tag) + ": " + e.what());
  } catch (const data_error& e) {
    throw data_error(std::string(tag) + ": " + e.what());
  }
}

}  // namespace

GeometryPhaseResult run_geometry_phase(const StyleAsset& source, const StyleAsset& target,
                                       const RunConfig& cfg) {
  validate_config(cfg);
  validate_mesh(source.mesh);
  validate_mesh(target.mesh);
  validate_labels(source.labels, source.mesh);
  validate_labels(target.labels, target.mesh);
  if (source.labels.part_names != target.labels.part_names)
    throw data_error("geometry phase: part alphabets differ");

  GeometryPhaseResult r;
  r.source_samples = sample_surface(source.mesh, source.labels, cfg.sample_count, cfg.random_seed);
  r.target_samples =
      sample_surface(target.mesh, target.labels, cfg.sample_count, cfg.random_seed + 1);
  r.ellipsoids = fit_refined_ellipsoids(r.source_samples, cfg);
  r.optimized = optimize_transforms(r.source_samples, r.target_samples, r.ellipsoids, cfg);
  r.warped_mesh = warp_mesh(source.mesh, r.ellipsoids, r.optimized.transforms, cfg.lambda);
  return r;
}

std::vector<Ellipsoid> fit_refined_ellipsoids(const LabeledPointSet& samples,
                                              const RunConfig& cfg) {
  return refine_ellipsoids(fit_part_ellipsoids(samples), samples, kRefineIterations,
                           cfg.ellipsoid_surface_samples);
}

TexturePhaseResult run_texture_phase(const StyleAsset& source, const StyleAsset& target) {
  if (!source.mesh.texture || !target.mesh.texture)
    throw data_error("texture phase: both meshes need textures");
  if (!source.mesh.has_uvs() || !target.mesh.has_uvs())
    throw data_error("texture phase: both meshes need UVs");

  TexturePhaseResult r;
  r.source_coverage =
      uv_coverage_mask(source.mesh, source.mesh.texture->width, source.mesh.texture->height);
  const BoolImage target_coverage =
      uv_coverage_mask(target.mesh, target.mesh.texture->width, target.mesh.texture->height);
  r.source_stats = color_stats(*source.mesh.texture, r.source_coverage);
  r.target_stats = color_stats(*target.mesh.texture, target_coverage);
  r.transform = solve_wct(r.source_stats, r.target_stats);
  r.stylized_texture = apply_color_transform(*source.mesh.texture, r.source_coverage, r.transform);
  return r;
}

StylizeResult stylize_joint(const StyleAsset& source, const StyleAsset& target,
                            const RunConfig& cfg) {
  validate_config(cfg);

  StylizeResult result;
  result.geometry = tagged_phase("phase 1 (geometry)",
                                 [&] { return run_geometry_phase(source, target, cfg); });
  result.texture =
      tagged_phase("phase 2 (texture)", [&] { return run_texture_phase(source, target); });

  const std::vector<Ellipsoid>& ells = result.geometry.ellipsoids;
  const bool render_terms = cfg.beta > 0.0 || cfg.gamma > 0.0;

  std::vector<double> geo_x = transforms_to_vector(result.geometry.optimized.transforms);
  std::vector<double> color_x = color_to_vector(result.texture.transform);
  std::vector<double> best_geo = geo_x;
  std::vector<double> best_color = color_x;
  double best_total = std::numeric_limits<double>::infinity();
  int best_step = -1;

  FrozenObjective objective(result.geometry.source_samples, result.geometry.target_samples,
                            std::span<const Ellipsoid>(ells), cfg);
  AdamState geo_adam(geo_x.size(), kGeometryRate);
  AdamState color_adam(color_x.size(), kColorRate);

  std::vector<Camera> cams;
  std::vector<RenderOutput> source_renders;      // static content references
  std::vector<TextureImage> source_blur;         // their masked-blurred images
  std::vector<PyramidFeatures> target_features;  // static style references
  double static_geometric = 0.0;

  if (cfg.joint_steps > 0) {
    if (render_terms) {
      Bbox3 box = source.mesh.bounds();
      box.merge(target.mesh.bounds());
      cams = camera_ring_around(box, cfg.views, cfg.elevation_deg, cfg.image_resolution);
      if (cfg.beta > 0.0) {
        source_renders = render_all(source.mesh, source.mesh.texture.get(), cams);
        for (const RenderOutput& r : source_renders)
          source_blur.push_back(masked_blur(r.rgb, r.mask));
      }
      if (cfg.gamma > 0.0) {
        for (const RenderOutput& r : render_all(target.mesh, target.mesh.texture.get(), cams))
          target_features.push_back(pyramid_features(r.rgb, r.mask));
      }
    } else {
      // Both render weights are zero: the loop state never changes, so the
      // geometric term is evaluated once and the render stack stays cold.
      const PartTransforms current = vector_to_transforms(geo_x);
      objective.refresh(current);
      static_geometric = objective.loss(current).total;
      if (!std::isfinite(static_geometric))
        throw stylize_abort("stylize: non-finite geometric loss", std::move(result.ledger));
    }
  }

  for (int step = 0; step < cfg.joint_steps; ++step) {
    if (!render_terms) {
      result.ledger.push_back({step, static_geometric, 0.0, 0.0, static_geometric});
      if (static_geometric < best_total) {
        best_total = static_geometric;
        best_step = step;
      }
      continue;
    }

    const PartTransforms current = vector_to_transforms(geo_x);
    const ColorTransform color = vector_to_color(color_x);

    // (a) render the current iterate: the warped mesh with the source
    // texture (the linear-resampling basis) and with the stylized texture.
    const TexturedMesh warped = warp_mesh(source.mesh, ells, current, cfg.lambda);
    const std::vector<RenderOutput> basis_renders =
        render_all(warped, source.mesh.texture.get(), cams);
    const TextureImage stylized =
        apply_color_transform(*source.mesh.texture, result.texture.source_coverage, color);
    const std::vector<RenderOutput> stylized_renders = render_all(warped, &stylized, cams);

    // Ledger entry: the objective at this step's starting state.
    objective.refresh(current);
    const FrozenObjective::Eval eq_geo = objective.loss(current);
    double content = 0.0, style = 0.0;
    if (cfg.beta > 0.0) content = content_loss(stylized_renders, source_renders);
    std::vector<PyramidFeatures> basis_features;
    if (cfg.gamma > 0.0) {
      std::vector<PyramidFeatures> stylized_features;
      for (const RenderOutput& r : stylized_renders)
        stylized_features.push_back(pyramid_features(r.rgb, r.mask));
      style = style_loss(stylized_features, target_features);
      for (const RenderOutput& r : basis_renders)
        basis_features.push_back(pyramid_features(r.rgb, r.mask));
    }
    const double total = eq_geo.total + cfg.beta * content + cfg.gamma * style;
    if (!std::isfinite(total))
      throw stylize_abort("stylize: non-finite total at step " + std::to_string(step),
                          std::move(result.ledger));
    result.ledger.push_back({step, eq_geo.total, cfg.beta * content, cfg.gamma * style, total});
    if (total < best_total) {
      best_total = total;
      best_step = step;
      best_geo = geo_x;
      best_color = color_x;
    }

    // (b) one analytic color step. Within the step the renders are a fixed
    // linear resampling of the texture, so the stylized render's masked
    // moments are exactly (linear * basis + bias) moments, and the
    // gradients of both render-space terms are closed-form.
    {
      Mat3 d_linear = Mat3::Zero();
      Vec3 d_bias = Vec3::Zero();
      if (cfg.gamma > 0.0) {
        for (std::size_t v = 0; v < cams.size(); ++v) {
          const std::size_t shared =
              std::min(basis_features[v].levels.size(), target_features[v].levels.size());
          for (std::size_t level = 0; level < shared; ++level) {
            const ColorStats& fx = basis_features[v].levels[level];
            const ColorStats& ft = target_features[v].levels[level];
            const Vec3 u = color.linear * fx.mean + color.bias - ft.mean;
            d_bias += cfg.gamma * 2.0 * u;
            d_linear += cfg.gamma * 2.0 * u * fx.mean.transpose();
            const Mat3 d =
                color.linear * fx.covariance * color.linear.transpose() - ft.covariance;
            d_linear += cfg.gamma * 4.0 * d * color.linear * fx.covariance;
          }
        }
      }
      if (cfg.beta > 0.0) {
        const double views = double(cams.size());
        for (std::size_t v = 0; v < cams.size(); ++v) {
          const TextureImage blurred_basis =
              masked_blur(basis_renders[v].rgb, basis_renders[v].mask);
          double sum_e = 0.0;
          Vec3 sum_ex = Vec3::Zero();
          std::size_t n = 0;
          for (int y = 0; y < blurred_basis.height; ++y)
            for (int x = 0; x < blurred_basis.width; ++x) {
              if (!basis_renders[v].mask.at(x, y) || !source_renders[v].mask.at(x, y)) continue;
              const Vec3 px = blurred_basis.pixel(x, y);
              const double e = kLuminance.dot(color.linear * px + color.bias) -
                               luminance(source_blur[v].pixel(x, y));
              sum_e += e;
              sum_ex += e * px;
              ++n;
            }
          if (n == 0) continue;
          const double scale = cfg.beta * 2.0 / (views * double(n));
          d_bias += scale * sum_e * kLuminance;
          d_linear += scale * kLuminance * sum_ex.transpose();
        }
      }
      std::vector<double> grad(12);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) grad[3 * r + c] = d_linear(r, c);
      for (int r = 0; r < 3; ++r) grad[9 + r] = d_bias[r];
      if (!all_finite(grad))
        throw stylize_abort("stylize: non-finite color gradient at step " + std::to_string(step),
                            std::move(result.ledger));
      color_adam.update(color_x, grad);
    }

    // (c) one frozen-correspondence geometry step (correspondences were
    // refreshed at this step's state above).
    {
      std::vector<double> grad;
      objective.loss_and_gradient(current, grad);
      if (!all_finite(grad))
        throw stylize_abort(
            "stylize: non-finite geometry gradient at step " + std::to_string(step),
            std::move(result.ledger));
      geo_adam.update(geo_x, grad);
    }
  }

  if (best_step >= 0) {
    result.transforms = vector_to_transforms(best_geo);
    result.color = vector_to_color(best_color);
  } else {
    result.transforms = result.geometry.optimized.transforms;
    result.color = result.texture.transform;
  }
  result.stylized_texture =
      apply_color_transform(*source.mesh.texture, result.texture.source_coverage, result.color);
  result.mesh = warp_mesh(source.mesh, ells, result.transforms, cfg.lambda);
  result.mesh.texture = std::make_shared<TextureImage>(result.stylized_texture);
  return result;
}

std::string sha256_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for digest: " + path.string());

  const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                    EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw io_error("digest init failed");

  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof(buffer));
    const std::streamsize got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx.get(), buffer, std::size_t(got)) != 1)
      throw io_error("digest update failed");
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) throw io_error("digest final failed");

  std::string hex(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i)
    std::snprintf(hex.data() + 2 * i, 3, "%02x", digest[i]);
  return hex;
}

namespace {

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json mat3_json(const Mat3& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

}  // namespace

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  Json doc;
  doc["tool_version"] = manifest.tool_version.empty() ? kVersion : manifest.tool_version;
  doc["command"] = manifest.command;
  doc["seed"] = manifest.config.random_seed;
  doc["config"] = config_to_json(manifest.config);
  Json inputs = Json::object();
  for (const auto& [label, digest] : manifest.input_digests) inputs[label] = digest;
  doc["input_sha256"] = inputs;
  Json timings = Json::object();
  for (const auto& [phase, seconds] : manifest.timings) timings[phase] = seconds;
  doc["timings_seconds"] = timings;
  save_json_file(doc, path);
}

void save_ellipsoids(std::span<const Ellipsoid> ells, std::span<const std::string> part_names,
                     const std::filesystem::path& path) {
  Json parts = Json::array();
  for (std::size_t i = 0; i < ells.size(); ++i) {
    Json e;
    e["name"] = i < part_names.size() ? part_names[i] : std::to_string(i);
    e["center"] = vec3_json(ells[i].center);
    e["rotation"] = mat3_json(ells[i].rotation);
    e["semi_axes"] = vec3_json(ells[i].semi_axes);
    parts.push_back(std::move(e));
  }
  save_json_file(Json{{"parts", std::move(parts)}}, path);
}

void save_transforms(const PartTransforms& transforms, std::span<const std::string> part_names,
                     const std::filesystem::path& path) {
  Json parts = Json::array();
  for (std::size_t i = 0; i < transforms.parts.size(); ++i) {
    Json t;
    t["name"] = i < part_names.size() ? part_names[i] : std::to_string(i);
    t["linear"] = mat3_json(transforms.parts[i].linear);
    t["translation"] = vec3_json(transforms.parts[i].translation);
    parts.push_back(std::move(t));
  }
  save_json_file(Json{{"parts", std::move(parts)}}, path);
}

void save_trace(const OptimizerTrace& trace, const std::filesystem::path& path) {
  Json doc;
  doc["iterations"] = trace.iterations;
  doc["converged"] = trace.converged;
  doc["xi_term"] = trace.xi;
  doc["sym_xi_term"] = trace.sym_xi;
  if (trace.best_iteration >= 0) {
    doc["best_iteration"] = trace.best_iteration;
    doc["best_total"] = trace.best_total;
  }
  doc["wall_seconds"] = trace.wall_seconds;
  Json entries = Json::array();
  for (const OptimizerTrace::Entry& e : trace.entries) {
    entries.push_back(Json{{"iteration", e.iteration},
                           {"data", e.data},
                           {"symmetry", e.sym_warp},
                           {"total", e.total}});
  }
  doc["entries"] = std::move(entries);
  save_json_file(doc, path);
}

void save_color_transform(const ColorTransform& transform, const std::filesystem::path& path) {
  Json doc;
  doc["linear"] = mat3_json(transform.linear);
  doc["bias"] = vec3_json(transform.bias);
  save_json_file(doc, path);
}

void save_ledger(std::span<const LedgerEntry> ledger, const std::filesystem::path& path) {
  Json steps = Json::array();
  for (const LedgerEntry& e : ledger) {
    steps.push_back(Json{{"step", e.step},
                         {"geometric", e.geometric},
                         {"weighted_content", e.weighted_content},
                         {"weighted_style", e.weighted_style},
                         {"total", e.total}});
  }
  save_json_file(Json{{"steps", std::move(steps)}}, path);
}

}  // namespace meshstyle
