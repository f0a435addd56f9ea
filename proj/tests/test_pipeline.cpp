#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <memory>
#include <vector>

#include "meshstyle/asset_io.hpp"
#include "meshstyle/cli.hpp"
#include "meshstyle/errors.hpp"
#include "meshstyle/pipeline.hpp"
#include "meshstyle/version.hpp"
#include "support/fixtures.hpp"

using namespace meshstyle;
using namespace testsupport;
using nlohmann::json;

namespace {

StyleAsset make_asset(int parts, std::uint64_t seed, int texture_size = 24) {
  const PartedMesh parted = make_parted_mesh(parts, seed);
  StyleAsset asset;
  asset.mesh = parted.mesh;
  asset.labels = parted.labels;
  asset.mesh.texture =
      std::make_shared<TextureImage>(make_noise_texture(texture_size, texture_size, seed + 7));
  return asset;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.sample_count = 300;
  cfg.geo_iters = 40;
  cfg.ellipsoid_surface_samples = 64;
  cfg.views = 2;
  cfg.image_resolution = 48;
  cfg.joint_steps = 0;
  return cfg;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

int run(std::vector<const char*> args) {
  args.insert(args.begin(), "meshstyle");
  return run_cli(int(args.size()), args.data());
}

bool same_transforms(const PartTransforms& a, const PartTransforms& b) {
  return transforms_to_vector(a) == transforms_to_vector(b);
}

}  // namespace

TEST_CASE("geometry phase follows its published recipe") {
  const StyleAsset src = make_asset(3, 101);
  const StyleAsset dst = make_asset(3, 102);
  const RunConfig cfg = small_config();
  const GeometryPhaseResult res = run_geometry_phase(src, dst, cfg);

  SUBCASE("sampling seeds are pinned") {
    const LabeledPointSet p = sample_surface(src.mesh, src.labels, cfg.sample_count,
                                             cfg.random_seed);
    const LabeledPointSet q = sample_surface(dst.mesh, dst.labels, cfg.sample_count,
                                             cfg.random_seed + 1);
    CHECK(res.source_samples.points == p.points);
    CHECK(res.source_samples.labels == p.labels);
    CHECK(res.target_samples.points == q.points);
  }
  SUBCASE("ellipsoids come from the refined fit of the source samples") {
    const std::vector<Ellipsoid> ells = fit_refined_ellipsoids(res.source_samples, cfg);
    REQUIRE(res.ellipsoids.size() == ells.size());
    for (std::size_t k = 0; k < ells.size(); ++k) {
      CHECK(res.ellipsoids[k].center == ells[k].center);
      CHECK(res.ellipsoids[k].rotation == ells[k].rotation);
      CHECK(res.ellipsoids[k].semi_axes == ells[k].semi_axes);
    }
  }
  SUBCASE("the warped mesh applies the optimized transforms") {
    const TexturedMesh warped =
        warp_mesh(src.mesh, res.ellipsoids, res.optimized.transforms, cfg.lambda);
    CHECK(res.warped_mesh.vertices == warped.vertices);
    CHECK(res.warped_mesh.uvs == src.mesh.uvs);
  }
  SUBCASE("part alphabets must agree") {
    StyleAsset renamed = dst;
    renamed.labels.part_names[0] = "other";
    CHECK_THROWS_WITH_AS(run_geometry_phase(src, renamed, cfg),
                         doctest::Contains("part alphabets"), data_error);
  }
}

TEST_CASE("texture phase is the whitening-coloring composition") {
  const StyleAsset src = make_asset(2, 111, 32);
  const StyleAsset dst = make_asset(2, 112, 20);
  const TexturePhaseResult res = run_texture_phase(src, dst);

  const BoolImage coverage = uv_coverage_mask(src.mesh, 32, 32);
  CHECK(res.source_coverage.data == coverage.data);

  const ColorStats src_stats = color_stats(*src.mesh.texture, coverage);
  const ColorStats tgt_stats =
      color_stats(*dst.mesh.texture, uv_coverage_mask(dst.mesh, 20, 20));
  CHECK(res.source_stats.mean == src_stats.mean);
  CHECK(res.source_stats.covariance == src_stats.covariance);
  CHECK(res.target_stats.mean == tgt_stats.mean);

  const ColorTransform wct = solve_wct(src_stats, tgt_stats);
  CHECK(res.transform.linear == wct.linear);
  CHECK(res.transform.bias == wct.bias);
  CHECK(res.stylized_texture.pixels ==
        apply_color_transform(*src.mesh.texture, coverage, wct).pixels);

  SUBCASE("missing textures are rejected with a phase tag") {
    StyleAsset bare = src;
    bare.mesh.texture.reset();
    CHECK_THROWS_WITH_AS(run_texture_phase(bare, dst), doctest::Contains("texture"),
                         data_error);
  }
}

TEST_CASE("stylize with zero joint steps composes the two phases") {
  const StyleAsset src = make_asset(2, 121);
  const StyleAsset dst = make_asset(2, 122);
  const RunConfig cfg = small_config();

  const StylizeResult res = stylize_joint(src, dst, cfg);
  const GeometryPhaseResult geo = run_geometry_phase(src, dst, cfg);
  const TexturePhaseResult tex = run_texture_phase(src, dst);

  CHECK(res.ledger.empty());
  CHECK(res.mesh.vertices == geo.warped_mesh.vertices);
  CHECK(same_transforms(res.transforms, geo.optimized.transforms));
  CHECK(res.stylized_texture.pixels == tex.stylized_texture.pixels);
  CHECK(res.color.linear == tex.transform.linear);
  CHECK(res.color.bias == tex.transform.bias);
  REQUIRE(res.mesh.texture != nullptr);
  CHECK(res.mesh.texture->pixels == res.stylized_texture.pixels);
}

TEST_CASE("zero-weight render terms leave the composition untouched") {
  const StyleAsset src = make_asset(2, 131);
  const StyleAsset dst = make_asset(2, 132);
  RunConfig cfg = small_config();
  cfg.beta = 0.0;
  cfg.gamma = 0.0;
  cfg.joint_steps = 5;

  const StylizeResult looped = stylize_joint(src, dst, cfg);
  RunConfig flat = cfg;
  flat.joint_steps = 0;
  const StylizeResult composed = stylize_joint(src, dst, flat);

  CHECK(looped.mesh.vertices == composed.mesh.vertices);
  CHECK(looped.stylized_texture.pixels == composed.stylized_texture.pixels);
  CHECK(same_transforms(looped.transforms, composed.transforms));
  CHECK(looped.color.linear == composed.color.linear);

  REQUIRE(looped.ledger.size() == 5);
  for (const LedgerEntry& entry : looped.ledger) {
    CHECK(entry.weighted_content == 0.0);
    CHECK(entry.weighted_style == 0.0);
    CHECK(entry.total == entry.geometric);
    CHECK(entry.geometric == looped.ledger.front().geometric);
  }
}

TEST_CASE("joint refinement keeps an honest ledger") {
  const StyleAsset src = make_asset(2, 141);
  const StyleAsset dst = make_asset(2, 142);
  RunConfig cfg = small_config();
  cfg.joint_steps = 3;

  const StylizeResult res = stylize_joint(src, dst, cfg);
  REQUIRE(res.ledger.size() == 3);
  for (std::size_t k = 0; k < res.ledger.size(); ++k) {
    const LedgerEntry& entry = res.ledger[k];
    CHECK(entry.step == int(k));
    CHECK(std::isfinite(entry.total));
    CHECK(entry.weighted_content >= 0.0);
    CHECK(entry.weighted_style >= 0.0);
    CHECK(entry.total == doctest::Approx(entry.geometric + entry.weighted_content +
                                         entry.weighted_style)
                             .epsilon(1e-9));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const LedgerEntry& entry : res.ledger) best = std::min(best, entry.total);
  CHECK(best <= res.ledger.front().total);

  SUBCASE("a rerun is bitwise identical") {
    const StylizeResult again = stylize_joint(src, dst, cfg);
    CHECK(again.mesh.vertices == res.mesh.vertices);
    CHECK(again.stylized_texture.pixels == res.stylized_texture.pixels);
    REQUIRE(again.ledger.size() == res.ledger.size());
    for (std::size_t k = 0; k < res.ledger.size(); ++k)
      CHECK(again.ledger[k].total == res.ledger[k].total);
  }
}

TEST_CASE("stylizing a shape onto itself stays near the identity") {
  const StyleAsset asset = make_asset(2, 151);
  RunConfig cfg = small_config();
  cfg.joint_steps = 2;
  const StylizeResult res = stylize_joint(asset, asset, cfg);
  CHECK((res.color.linear - Mat3::Identity()).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(res.color.bias.cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("numeric failures raise typed aborts") {
  StyleAsset src = make_asset(2, 161);
  const StyleAsset dst = make_asset(2, 162);
  auto poisoned = std::make_shared<TextureImage>(*src.mesh.texture);
  std::fill(poisoned->pixels.begin(), poisoned->pixels.end(),
            std::numeric_limits<double>::quiet_NaN());
  src.mesh.texture = poisoned;

  RunConfig cfg = small_config();
  cfg.joint_steps = 1;
  cfg.gamma = 0.0;  // the content term alone sees the poisoned source renders
  CHECK_THROWS_AS(stylize_joint(src, dst, cfg), numeric_error);
}

TEST_CASE("artifact files keep their documented shapes") {
  TempDir dir;
  SUBCASE("file digests match the reference implementation") {
    const auto path = dir.file("abc.txt");
    write_text(path, "abc");
    CHECK(sha256_file_hex(path) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_THROWS_AS(sha256_file_hex(dir.file("absent.bin")), io_error);
  }
  SUBCASE("optimizer traces serialize their entries") {
    OptimizerTrace trace;
    trace.xi = 0.25;
    trace.sym_xi = 0.5;
    trace.iterations = 2;
    trace.converged = true;
    trace.best_iteration = 1;
    trace.best_total = 1.5;
    trace.entries = {{0, 1.0, 0.5, 2.0}, {1, 0.75, 0.25, 1.5}};
    const auto path = dir.file("trace.json");
    save_trace(trace, path);
    const json j = load_json(path);
    CHECK(j["iterations"] == 2);
    CHECK(j["converged"] == true);
    CHECK(j["best_iteration"] == 1);
    CHECK(j["entries"].size() == 2);
    CHECK(j["entries"][1]["total"] == 1.5);
  }
  SUBCASE("an aborted trace omits the best iterate") {
    OptimizerTrace trace;  // never reached a finite evaluation
    const auto path = dir.file("empty_trace.json");
    save_trace(trace, path);
    const json j = load_json(path);
    CHECK(j["entries"].empty());
    CHECK(!j.contains("best_iteration"));
  }
  SUBCASE("ledgers serialize one record per step") {
    std::vector<LedgerEntry> ledger = {{0, 1.0, 0.1, 0.01, 1.11}, {1, 0.9, 0.1, 0.01, 1.01}};
    const auto path = dir.file("ledger.json");
    save_ledger(ledger, path);
    const json j = load_json(path);
    REQUIRE(j["steps"].size() == 2);
    CHECK(j["steps"][0]["step"] == 0);
    CHECK(j["steps"][1]["total"] == 1.01);
    CHECK(j["steps"][0]["weighted_style"] == 0.01);
  }
  SUBCASE("manifests carry version, digests, and timings") {
    RunManifest manifest;
    manifest.tool_version = kVersion;
    manifest.command = "stylize";
    manifest.input_digests = {{"source_mesh", "00ff"}};
    manifest.timings = {{"stylize", 1.25}};
    const auto path = dir.file("manifest.json");
    save_manifest(manifest, path);
    const json j = load_json(path);
    CHECK(j["tool_version"] == kVersion);
    CHECK(j["command"] == "stylize");
    CHECK(j["input_sha256"]["source_mesh"] == "00ff");
    CHECK(j["timings_seconds"]["stylize"] == 1.25);
    CHECK(j["config"]["lambda"] == 4.0);
    CHECK(j["config"]["joint_steps"] == 20);
  }
  SUBCASE("ellipsoid and transform tables name their parts") {
    std::vector<Ellipsoid> ells(2);
    ells[1].center = Vec3(1, 2, 3);
    const std::vector<std::string> names = {"body", "wing"};
    save_ellipsoids(ells, names, dir.file("ellipsoids.json"));
    const json je = load_json(dir.file("ellipsoids.json"));
    REQUIRE(je["parts"].size() == 2);
    CHECK(je["parts"][1]["name"] == "wing");
    CHECK(je["parts"][1]["center"][2] == 3.0);
    CHECK(je["parts"][0]["rotation"].size() == 3);

    PartTransforms t = PartTransforms::identity(2);
    t.parts[0].translation = Vec3(0.5, 0, 0);
    save_transforms(t, names, dir.file("transforms.json"));
    const json jt = load_json(dir.file("transforms.json"));
    CHECK(jt["parts"][0]["translation"][0] == 0.5);
    CHECK(jt["parts"][1]["linear"][0][0] == 1.0);

    ColorTransform color;
    color.bias = Vec3(0.1, 0.2, 0.3);
    save_color_transform(color, dir.file("color.json"));
    const json jc = load_json(dir.file("color.json"));
    CHECK(jc["bias"][1] == 0.2);
    CHECK(jc["linear"][2][2] == 1.0);
  }
}

TEST_CASE("the command line drives every pipeline stage") {
  TempDir dir;
  const StyleAsset src = make_asset(3, 171);
  const StyleAsset dst = make_asset(3, 172);
  const auto src_mesh = dir.file("source.obj");
  const auto dst_mesh = dir.file("target.obj");
  save_mesh(src.mesh, src_mesh);
  save_mesh(dst.mesh, dst_mesh);
  save_part_labels(src.labels, dir.file("source.labels.json"));
  save_part_labels(dst.labels, dir.file("target.labels.json"));
  save_texture(*src.mesh.texture, dir.file("source.png"));
  save_texture(*dst.mesh.texture, dir.file("target.png"));
  const auto cfg_path = dir.file("config.json");
  write_text(cfg_path,
             "{\"sample_count\":300,\"geo_iters\":40,\"joint_steps\":2,\"views\":2,"
             "\"image_resolution\":48,\"ellipsoid_surface_samples\":64}");

  const std::string src_arg = src_mesh.string();
  const std::string dst_arg = dst_mesh.string();
  const std::string cfg_arg = cfg_path.string();

  SUBCASE("stylize writes the full artifact set") {
    const auto out = dir.file("stylize_out");
    CHECK(run({"stylize", "--source", src_arg.c_str(), "--target", dst_arg.c_str(),
               "--config", cfg_arg.c_str(), "--out-dir", out.string().c_str()}) == 0);
    for (const char* name :
         {"stylized_mesh.obj", "stylized_texture.png", "transforms.json",
          "color_transform.json", "ledger.json", "trace.json", "manifest.json"})
      CHECK(std::filesystem::exists(out / name));
    const json ledger = load_json(out / "ledger.json");
    CHECK(ledger["steps"].size() == 2);
    const json manifest = load_json(out / "manifest.json");
    CHECK(manifest["command"] == "stylize");
    CHECK(manifest["config"]["joint_steps"] == 2);
    CHECK(manifest["input_sha256"].contains("source"));
    CHECK(manifest["input_sha256"]["source"] == sha256_file_hex(src_mesh));
    const TexturedMesh stylized = load_mesh(out / "stylized_mesh.obj");
    CHECK(stylized.vertices.size() == src.mesh.vertices.size());
  }
  SUBCASE("transfer-geometry writes the warped mesh and trace") {
    const auto out = dir.file("geo_out");
    CHECK(run({"transfer-geometry", "--source", src_arg.c_str(), "--target",
               dst_arg.c_str(), "--config", cfg_arg.c_str(), "--out-dir",
               out.string().c_str()}) == 0);
    const TexturedMesh warped = load_mesh(out / "warped_mesh.obj");
    CHECK(warped.faces.size() == src.mesh.faces.size());
    const json trace = load_json(out / "trace.json");
    CHECK(trace["entries"].size() > 0);
    const json transforms = load_json(out / "transforms.json");
    CHECK(transforms["parts"].size() == 3);
  }
  SUBCASE("transfer-texture writes the recolored atlas") {
    const auto out = dir.file("tex_out");
    CHECK(run({"transfer-texture", "--source", src_arg.c_str(), "--target",
               dst_arg.c_str(), "--out-dir", out.string().c_str()}) == 0);
    const TextureImage tex = load_texture(out / "stylized_texture.png");
    CHECK(tex.width == src.mesh.texture->width);
    CHECK(std::filesystem::exists(out / "color_transform.json"));
  }
  SUBCASE("fit-ellipsoids reports one entry per part") {
    const auto out = dir.file("fit_out");
    CHECK(run({"fit-ellipsoids", "--source", src_arg.c_str(), "--config", cfg_arg.c_str(),
               "--out-dir", out.string().c_str()}) == 0);
    const json ells = load_json(out / "ellipsoids.json");
    CHECK(ells["parts"].size() == 3);
  }
  SUBCASE("render writes a view and mask image per camera") {
    const auto out = dir.file("render_out");
    CHECK(run({"render", "--source", src_arg.c_str(), "--views", "2", "--resolution", "32",
               "--out-dir", out.string().c_str()}) == 0);
    for (const char* name : {"view_000.png", "mask_000.png", "view_001.png", "mask_001.png"})
      CHECK(std::filesystem::exists(out / name));
    const TextureImage view = load_texture(out / "view_000.png");
    CHECK(view.width == 32);
  }
  SUBCASE("metrics on a mesh against itself is a perfect score") {
    const auto out = dir.file("metrics_out");
    CHECK(run({"metrics", "--pred", src_arg.c_str(), "--gt", src_arg.c_str(), "--config",
               cfg_arg.c_str(), "--out-dir", out.string().c_str()}) == 0);
    const json metrics = load_json(out / "metrics.json");
    CHECK(metrics["chamfer"] == 0.0);
    CHECK(metrics["chamfer_l1"] == 0.0);
    CHECK(metrics["f_score"] == 1.0);
    CHECK(metrics["part_distance"] == 0.0);
  }
  SUBCASE("failures map to distinct exit codes") {
    CHECK(run({"stylize", "--source", dir.file("missing.obj").string().c_str(), "--target",
               dst_arg.c_str(), "--out-dir", dir.file("x").string().c_str()}) == 2);
    CHECK(run({"stylize", "--frobnicate"}) == 1);
    CHECK(run({"--help"}) == 0);
    CHECK(run({"--version"}) == 0);
    const auto bad_cfg = dir.file("bad.json");
    write_text(bad_cfg, "{\"geo_itres\":10}");
    CHECK(run({"transfer-geometry", "--source", src_arg.c_str(), "--target",
               dst_arg.c_str(), "--config", bad_cfg.string().c_str(), "--out-dir",
               dir.file("y").string().c_str()}) == 2);
  }
}
