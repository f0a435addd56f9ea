#include "meshstyle/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json_util.hpp"
#include "meshstyle/asset_io.hpp"
#include "meshstyle/metrics.hpp"
#include "meshstyle/pipeline.hpp"
#include "meshstyle/version.hpp"

namespace meshstyle {

namespace {

namespace fs = std::filesystem;

struct LoadedAsset {
  StyleAsset asset;
  std::string mesh_path;
  std::string labels_path;   // empty when a single-part labeling was synthesized
  std::string texture_path;  // empty when the mesh has no texture
};

// Sibling file with the mesh's extension swapped, e.g. s.obj -> s.png.
std::string sibling(const std::string& mesh_path, const char* ext) {
  return fs::path(mesh_path).replace_extension(ext).string();
}

PartLabeling single_part_labels(const TexturedMesh& mesh) {
  PartLabeling labels;
  labels.part_names = {"all"};
  labels.face_part.assign(mesh.faces.size(), 0);
  return labels;
}

// Loads a mesh with its labels and texture. Explicit paths win; otherwise
// sidecar files (<stem>.labels.json, <stem>.png) are picked up, and a
// single-part labeling stands in when no label file exists.
LoadedAsset load_asset(const std::string& mesh_path, const std::string& labels_path,
                       const std::string& texture_path) {
  LoadedAsset out;
  out.mesh_path = mesh_path;
  out.asset.mesh = load_mesh(mesh_path);

  std::string labels = labels_path;
  if (labels.empty()) {
    const std::string guess = sibling(mesh_path, ".labels.json");
    if (fs::exists(guess)) labels = guess;
  }
  if (!labels.empty()) {
    out.asset.labels = load_part_labels(labels, out.asset.mesh);
    out.labels_path = labels;
  } else {
    out.asset.labels = single_part_labels(out.asset.mesh);
  }

  std::string texture = texture_path;
  if (texture.empty()) {
    const std::string guess = sibling(mesh_path, ".png");
    if (fs::exists(guess)) texture = guess;
  }
  if (!texture.empty()) {
    out.asset.mesh.texture = std::make_shared<TextureImage>(load_texture(texture));
    out.texture_path = texture;
  }
  return out;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_input_digest(RunManifest& manifest, const std::string& label, const std::string& path) {
  if (!path.empty()) manifest.input_digests.emplace_back(label, sha256_file_hex(path));
}

TextureImage mask_to_image(const BoolImage& mask) {
  TextureImage img = TextureImage::filled(mask.width, mask.height, Vec3::Zero());
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) img.set_pixel(x, y, Vec3::Ones());
  return img;
}

struct CliArgs {
  std::string source, target;
  std::string source_labels, target_labels;
  std::string source_texture, target_texture;
  std::string pred, gt, pred_labels, gt_labels;
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int views = 0;
  int resolution = 0;
};

// Option presence without assuming the subcommand defines the flag.
bool passed(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

RunConfig resolve_config(const CliArgs& a, const CLI::App* cmd) {
  RunConfig cfg;
  if (!a.config_path.empty()) cfg = load_config(a.config_path);
  if (passed(cmd, "--seed")) cfg.random_seed = a.seed;
  if (passed(cmd, "--views")) cfg.views = a.views;
  if (passed(cmd, "--resolution")) cfg.image_resolution = a.resolution;
  validate_config(cfg);
  return cfg;
}

RunManifest start_manifest(const std::string& command, const RunConfig& cfg, const CliArgs& a) {
  RunManifest m;
  m.tool_version = kVersion;
  m.command = command;
  m.config = cfg;
  add_input_digest(m, "config", a.config_path);
  return m;
}

fs::path prepare_out_dir(const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  return dir;
}

int run_fit_ellipsoids(const CliArgs& a, const CLI::App* cmd) {
  const RunConfig cfg = resolve_config(a, cmd);
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedAsset source = load_asset(a.source, a.source_labels, a.source_texture);
  const LabeledPointSet samples =
      sample_surface(source.asset.mesh, source.asset.labels, cfg.sample_count, cfg.random_seed);
  const std::vector<Ellipsoid> ells = fit_refined_ellipsoids(samples, cfg);

  const fs::path dir = prepare_out_dir(a.out_dir);
  save_ellipsoids(ells, samples.part_names, dir / "ellipsoids.json");
  RunManifest manifest = start_manifest("fit-ellipsoids", cfg, a);
  add_input_digest(manifest, "source", source.mesh_path);
  add_input_digest(manifest, "source_labels", source.labels_path);
  manifest.timings.emplace_back("fit", seconds_since(t0));
  save_manifest(manifest, dir / "manifest.json");
  return 0;
}

int run_transfer_geometry(const CliArgs& a, const CLI::App* cmd) {
  const RunConfig cfg = resolve_config(a, cmd);
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedAsset source = load_asset(a.source, a.source_labels, a.source_texture);
  const LoadedAsset target = load_asset(a.target, a.target_labels, a.target_texture);
  const GeometryPhaseResult result = run_geometry_phase(source.asset, target.asset, cfg);

  const fs::path dir = prepare_out_dir(a.out_dir);
  save_mesh(result.warped_mesh, dir / "warped_mesh.obj");
  save_transforms(result.optimized.transforms, result.source_samples.part_names,
                  dir / "transforms.json");
  save_trace(result.optimized.trace, dir / "trace.json");
  RunManifest manifest = start_manifest("transfer-geometry", cfg, a);
  add_input_digest(manifest, "source", source.mesh_path);
  add_input_digest(manifest, "source_labels", source.labels_path);
  add_input_digest(manifest, "target", target.mesh_path);
  add_input_digest(manifest, "target_labels", target.labels_path);
  manifest.timings.emplace_back("geometry", seconds_since(t0));
  save_manifest(manifest, dir / "manifest.json");
  return 0;
}

int run_transfer_texture(const CliArgs& a, const CLI::App* cmd) {
  const RunConfig cfg = resolve_config(a, cmd);
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedAsset source = load_asset(a.source, a.source_labels, a.source_texture);
  const LoadedAsset target = load_asset(a.target, a.target_labels, a.target_texture);
  const TexturePhaseResult result = run_texture_phase(source.asset, target.asset);

  const fs::path dir = prepare_out_dir(a.out_dir);
  save_texture(result.stylized_texture, dir / "stylized_texture.png");
  save_color_transform(result.transform, dir / "color_transform.json");
  RunManifest manifest = start_manifest("transfer-texture", cfg, a);
  add_input_digest(manifest, "source", source.mesh_path);
  add_input_digest(manifest, "source_texture", source.texture_path);
  add_input_digest(manifest, "target", target.mesh_path);
  add_input_digest(manifest, "target_texture", target.texture_path);
  manifest.timings.emplace_back("texture", seconds_since(t0));
  save_manifest(manifest, dir / "manifest.json");
  return 0;
}

int run_stylize(const CliArgs& a, const CLI::App* cmd) {
  const RunConfig cfg = resolve_config(a, cmd);
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedAsset source = load_asset(a.source, a.source_labels, a.source_texture);
  const LoadedAsset target = load_asset(a.target, a.target_labels, a.target_texture);
  const fs::path dir = prepare_out_dir(a.out_dir);

  StylizeResult result;
  try {
    result = stylize_joint(source.asset, target.asset, cfg);
  } catch (const stylize_abort& abort) {
    save_ledger(abort.ledger, dir / "ledger.json");  // progress up to the abort
    throw;
  }

  save_mesh(result.mesh, dir / "stylized_mesh.obj");
  save_texture(result.stylized_texture, dir / "stylized_texture.png");
  save_transforms(result.transforms, result.geometry.source_samples.part_names,
                  dir / "transforms.json");
  save_color_transform(result.color, dir / "color_transform.json");
  save_ledger(result.ledger, dir / "ledger.json");
  save_trace(result.geometry.optimized.trace, dir / "trace.json");
  RunManifest manifest = start_manifest("stylize", cfg, a);
  add_input_digest(manifest, "source", source.mesh_path);
  add_input_digest(manifest, "source_labels", source.labels_path);
  add_input_digest(manifest, "source_texture", source.texture_path);
  add_input_digest(manifest, "target", target.mesh_path);
  add_input_digest(manifest, "target_labels", target.labels_path);
  add_input_digest(manifest, "target_texture", target.texture_path);
  manifest.timings.emplace_back("stylize", seconds_since(t0));
  save_manifest(manifest, dir / "manifest.json");
  return 0;
}

int run_render(const CliArgs& a, const CLI::App* cmd) {
  const RunConfig cfg = resolve_config(a, cmd);
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedAsset source = load_asset(a.source, a.source_labels, a.source_texture);
  const std::vector<Camera> cams =
      camera_ring(source.asset.mesh, cfg.views, cfg.elevation_deg, cfg.image_resolution);
  const std::vector<RenderOutput> renders =
      render_all(source.asset.mesh, source.asset.mesh.texture.get(), cams);

  const fs::path dir = prepare_out_dir(a.out_dir);
  for (std::size_t v = 0; v < renders.size(); ++v) {
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03zu.png", v);
    save_texture(renders[v].rgb, dir / name);
    std::snprintf(name, sizeof(name), "mask_%03zu.png", v);
    save_texture(mask_to_image(renders[v].mask), dir / name);
  }
  RunManifest manifest = start_manifest("render", cfg, a);
  add_input_digest(manifest, "source", source.mesh_path);
  add_input_digest(manifest, "source_texture", source.texture_path);
  manifest.timings.emplace_back("render", seconds_since(t0));
  save_manifest(manifest, dir / "manifest.json");
  return 0;
}

int run_metrics(const CliArgs& a, const CLI::App* cmd) {
  const RunConfig cfg = resolve_config(a, cmd);
  const LoadedAsset pred = load_asset(a.pred, a.pred_labels, "");
  const LoadedAsset gt = load_asset(a.gt, a.gt_labels, "");

  // Both shapes are sampled with the same seed so identical inputs yield
  // identical point sets (and exact zero distances).
  const LabeledPointSet p =
      sample_surface(pred.asset.mesh, pred.asset.labels, cfg.sample_count, cfg.random_seed);
  const LabeledPointSet q =
      sample_surface(gt.asset.mesh, gt.asset.labels, cfg.sample_count, cfg.random_seed);

  const double tau = cfg.fscore_tau_fraction * gt.asset.mesh.bounds().diagonal();
  const double chamfer = chamfer_l2(p.points, q.points);
  const double chamfer1 = chamfer_l1(p.points, q.points);
  const double fscore = f_score(p.points, q.points, tau);
  const bool parts_comparable = p.part_names == q.part_names;
  double part_dist = 0.0;
  if (parts_comparable)
    part_dist = part_distance(p, q);
  else
    warn("metrics: part alphabets differ; part distance skipped");

  std::printf("samples       %d\n", cfg.sample_count);
  std::printf("tau           %.9g\n", tau);
  std::printf("chamfer       %.9g\n", chamfer);
  std::printf("chamfer_l1    %.9g\n", chamfer1);
  std::printf("f_score       %.9g\n", fscore);
  if (parts_comparable) std::printf("part_distance %.9g\n", part_dist);

  if (!a.out_dir.empty()) {
    const fs::path dir = prepare_out_dir(a.out_dir);
    Json doc;
    doc["samples"] = cfg.sample_count;
    doc["tau"] = tau;
    doc["chamfer"] = chamfer;
    doc["chamfer_l1"] = chamfer1;
    doc["f_score"] = fscore;
    if (parts_comparable) doc["part_distance"] = part_dist;
    save_json_file(doc, dir / "metrics.json");
    RunManifest manifest = start_manifest("metrics", cfg, a);
    add_input_digest(manifest, "pred", pred.mesh_path);
    add_input_digest(manifest, "pred_labels", pred.labels_path);
    add_input_digest(manifest, "gt", gt.mesh_path);
    add_input_digest(manifest, "gt_labels", gt.labels_path);
    save_manifest(manifest, dir / "manifest.json");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CliArgs args;
  CLI::App app{"part-aware mesh style transfer"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto add_config_opts = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "run configuration file (JSON)");
    cmd->add_option("--seed", args.seed, "random seed override");
  };
  auto add_source_opts = [&](CLI::App* cmd) {
    cmd->add_option("--source", args.source, "source mesh (OBJ)")->required();
    cmd->add_option("--source-labels", args.source_labels, "source part labels (JSON)");
    cmd->add_option("--source-texture", args.source_texture, "source texture (PNG)");
  };
  auto add_target_opts = [&](CLI::App* cmd) {
    cmd->add_option("--target", args.target, "target mesh (OBJ)")->required();
    cmd->add_option("--target-labels", args.target_labels, "target part labels (JSON)");
    cmd->add_option("--target-texture", args.target_texture, "target texture (PNG)");
  };
  auto add_view_opts = [&](CLI::App* cmd) {
    cmd->add_option("--views", args.views, "camera count override");
    cmd->add_option("--resolution", args.resolution, "image resolution override");
  };
  auto add_out_dir = [&](CLI::App* cmd, bool required) {
    CLI::Option* opt = cmd->add_option("--out-dir", args.out_dir, "output directory");
    if (required) opt->required();
  };

  CLI::App* fit = app.add_subcommand("fit-ellipsoids", "fit per-part ellipsoids to a mesh");
  add_source_opts(fit);
  add_config_opts(fit);
  add_out_dir(fit, true);

  CLI::App* geo = app.add_subcommand("transfer-geometry",
                                     "optimize per-part affines to match a target shape");
  add_source_opts(geo);
  add_target_opts(geo);
  add_config_opts(geo);
  add_out_dir(geo, true);

  CLI::App* tex = app.add_subcommand("transfer-texture",
                                     "match source texture color statistics to a target");
  add_source_opts(tex);
  add_target_opts(tex);
  add_config_opts(tex);
  add_out_dir(tex, true);

  CLI::App* sty = app.add_subcommand("stylize", "joint geometry and texture transfer");
  add_source_opts(sty);
  add_target_opts(sty);
  add_config_opts(sty);
  add_view_opts(sty);
  add_out_dir(sty, true);

  CLI::App* ren = app.add_subcommand("render", "render a camera ring around a mesh");
  add_source_opts(ren);
  add_config_opts(ren);
  add_view_opts(ren);
  add_out_dir(ren, true);

  CLI::App* met = app.add_subcommand("metrics", "point-sampled distances between two meshes");
  met->add_option("--pred", args.pred, "predicted mesh (OBJ)")->required();
  met->add_option("--gt", args.gt, "ground-truth mesh (OBJ)")->required();
  met->add_option("--pred-labels", args.pred_labels, "predicted part labels (JSON)");
  met->add_option("--gt-labels", args.gt_labels, "ground-truth part labels (JSON)");
  add_config_opts(met);
  add_out_dir(met, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (fit->parsed()) return run_fit_ellipsoids(args, fit);
    if (geo->parsed()) return run_transfer_geometry(args, geo);
    if (tex->parsed()) return run_transfer_texture(args, tex);
    if (sty->parsed()) return run_stylize(args, sty);
    if (ren->parsed()) return run_render(args, ren);
    if (met->parsed()) return run_metrics(args, met);
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

}  // namespace meshstyle
