// Command-line front end: unwrap, bake, baselines, render, compare, synth, bench.

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pointbake/baselines.hpp"
#include "pointbake/errors.hpp"
#include "pointbake/io.hpp"
#include "pointbake/manifest.hpp"
#include "pointbake/metrics.hpp"
#include "pointbake/profile.hpp"
#include "pointbake/render.hpp"
#include "pointbake/synth.hpp"
#include "pointbake/uv_atlas.hpp"

namespace fs = std::filesystem;
using namespace pointbake;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitConfig = 4;

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("malformed ") + what + ": '" + text + "'");
    }
  }
  if (out.size() != count)
    throw ConfigError(std::string(what) + " needs " + std::to_string(count) + " comma-separated numbers");
  return out;
}

struct BakeOptions {
  BakeConfig cfg;
  bool no_normals = false;
  std::string prefix;
};

void add_bake_options(CLI::App* cmd, BakeOptions& o) {
  cmd->add_option("--d-max", o.cfg.d_max, "Distance threshold (scene units)")->capture_default_str();
  cmd->add_option("--angle-max", o.cfg.angle_max_deg, "Normal angle threshold (degrees)")
      ->capture_default_str();
  cmd->add_option("--resolution", o.cfg.resolution, "Texture size in texels")->capture_default_str();
  cmd->add_option("--gutter", o.cfg.gutter, "Gutter dilation in texels")->capture_default_str();
  cmd->add_option("--k", o.cfg.vertex_attr_k, "Neighbors for vertex colors")->capture_default_str();
  cmd->add_option("--cell-size", o.cfg.grid_cell_size, "Grid cell size (0: 2 * d-max)");
  cmd->add_flag("--no-normals", o.no_normals, "Normal map from vertex normals only");
  cmd->add_option("-o,--output", o.prefix, "Output prefix")->required();
}

void write_maps(const std::string& prefix, const TexelGrid& albedo, const TexelGrid& normals) {
  const fs::path p(prefix);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  io::write_image(albedo, prefix + "_albedo.png");
  io::write_image(normals, prefix + "_normal.png");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json stats_json(const BakeStats& s) {
  return {{"timings_ms",
           {{"grid", s.grid_ms},
            {"vertex_payload", s.vertex_payload_ms},
            {"ownership", s.ownership_ms},
            {"gather", s.gather_ms},
            {"map", s.map_ms},
            {"triangulate", s.triangulate_ms},
            {"interpolate", s.interpolate_ms},
            {"dilate", s.dilate_ms},
            {"total", s.total_ms}}},
          {"faces", s.faces},
          {"points_gathered", s.points_gathered},
          {"points_outside", s.points_outside},
          {"points_transferred", s.points_transferred},
          {"points_deduplicated", s.points_deduplicated},
          {"points_on_boundary", s.points_on_boundary},
          {"covered_texels", s.covered_texels},
          {"sliver_texels", s.sliver_texels},
          {"empty_faces", s.empty_faces},
          {"degenerate_uv_faces", s.degenerate_uv_faces}};
}

Camera parse_camera(const std::string& text, const std::string& size, const std::string& up) {
  const auto c = parse_numbers(text, 7, "--camera");
  Camera cam;
  cam.position = Vec3(c[0], c[1], c[2]);
  cam.look_at = Vec3(c[3], c[4], c[5]);
  cam.vertical_fov_deg = c[6];
  const auto x = size.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(size);
    cam.width = std::stoi(size.substr(0, x));
    cam.height = std::stoi(size.substr(x + 1));
  } catch (const std::exception&) {
    throw ConfigError("--size must look like WIDTHxHEIGHT, got '" + size + "'");
  }
  if (!up.empty()) {
    const auto u = parse_numbers(up, 3, "--up");
    cam.up = Vec3(u[0], u[1], u[2]);
  }
  const double span = (cam.look_at - cam.position).norm();
  cam.near_plane = std::max(1e-4, 1e-3 * span);
  cam.far_plane = std::max(100.0, 100.0 * span);
  cam.validate();
  return cam;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bake texture and normal maps for triangle meshes from colored point clouds"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: all cores)");

  // unwrap
  auto* unwrap = app.add_subcommand("unwrap", "Generate a per-triangle UV atlas");
  std::string unwrap_in, unwrap_out;
  int unwrap_res = 1024, unwrap_gutter = 2;
  unwrap->add_option("mesh", unwrap_in, "Input OBJ")->required();
  unwrap->add_option("--resolution", unwrap_res, "Atlas size in texels")->capture_default_str();
  unwrap->add_option("--gutter", unwrap_gutter, "Gutter in texels")->capture_default_str();
  unwrap->add_option("-o,--output", unwrap_out, "Output OBJ")->required();

  // bake / bake-lpm
  auto* bake = app.add_subcommand("bake", "Transfer point colors and normals into texture maps");
  std::string bake_cloud, bake_mesh;
  BakeOptions bake_opts;
  bake->add_option("cloud", bake_cloud, "Input PLY point cloud")->required();
  bake->add_option("mesh", bake_mesh, "Input OBJ with UVs")->required();
  add_bake_options(bake, bake_opts);

  auto* lpm = app.add_subcommand("bake-lpm", "Bake from interpolated vertex payloads only");
  std::string lpm_cloud, lpm_mesh;
  BakeOptions lpm_opts;
  lpm->add_option("cloud", lpm_cloud, "Input PLY point cloud")->required();
  lpm->add_option("mesh", lpm_mesh, "Input OBJ with UVs")->required();
  add_bake_options(lpm, lpm_opts);

  auto* remesh = app.add_subcommand("bake-remesh", "Bake from a dense vertex-colored mesh");
  std::string remesh_high, remesh_low;
  BakeOptions remesh_opts;
  remesh->add_option("high", remesh_high, "Dense OBJ with vertex colors and normals")->required();
  remesh->add_option("low", remesh_low, "Target OBJ with UVs")->required();
  add_bake_options(remesh, remesh_opts);

  // render
  auto* rend = app.add_subcommand("render", "Render a textured mesh");
  std::string rend_mesh, rend_albedo, rend_normal, rend_camera, rend_size = "512x512", rend_up,
                         rend_light, rend_out;
  rend->add_option("mesh", rend_mesh, "OBJ with UVs")->required();
  rend->add_option("albedo", rend_albedo, "Albedo PNG")->required();
  rend->add_option("normal", rend_normal, "Normal map PNG");
  rend->add_option("--camera", rend_camera, "x,y,z,lx,ly,lz,fov")->required();
  rend->add_option("--size", rend_size, "WIDTHxHEIGHT")->capture_default_str();
  rend->add_option("--up", rend_up, "Camera up vector x,y,z (default 0,1,0)");
  rend->add_option("--light", rend_light, "Light direction x,y,z (default: along the view)");
  rend->add_option("-o,--output", rend_out, "Output PNG")->required();

  // compare
  auto* cmp = app.add_subcommand("compare", "RMSE and PSNR between two PNGs");
  std::string cmp_a, cmp_b;
  cmp->add_option("a", cmp_a)->required();
  cmp->add_option("b", cmp_b)->required();

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic scene");
  std::string syn_kind, syn_out;
  std::size_t syn_points = 1000000;
  double syn_noise = 0.0;
  std::uint64_t syn_seed = 1;
  bool syn_ascii = false;
  syn->add_option("kind", syn_kind, "checker-plane | stripe-sphere | step-wall")->required();
  syn->add_option("--points", syn_points)->capture_default_str();
  syn->add_option("--noise", syn_noise, "Gaussian position noise sigma")->capture_default_str();
  syn->add_option("--seed", syn_seed)->capture_default_str();
  syn->add_flag("--ascii", syn_ascii, "Write the cloud as ASCII PLY");
  syn->add_option("-o,--output", syn_out, "Output directory")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Profile the three pipelines on a scene manifest");
  std::string bench_manifest, bench_out;
  double bench_hz = 200.0;
  bench->add_option("manifest", bench_manifest)->required();
  bench->add_option("--sample-hz", bench_hz, "RSS sampling rate")->capture_default_str();
  bench->add_option("-o,--output", bench_out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);

    if (*unwrap) {
      const TriangleMesh mesh = io::read_mesh(unwrap_in);
      const UVAtlas atlas = unwrap_per_triangle(mesh, unwrap_res, unwrap_gutter);
      io::write_mesh(with_atlas_uvs(mesh, atlas), unwrap_out);
    } else if (*bake) {
      bake_opts.cfg.bake_normals = !bake_opts.no_normals;
      bake_opts.cfg.validate();
      const TriangleMesh mesh = io::read_mesh(bake_mesh);
      if (!mesh.has_uvs())
        throw MissingUVs("mesh has no texture coordinates; run `unwrap` first to generate an atlas");
      const PointCloud cloud = io::read_pointcloud(bake_cloud);
      const BakeResult r = bake_all(mesh, cloud, bake_opts.cfg);
      write_maps(bake_opts.prefix, r.texture, r.normal_map);
      json stats = stats_json(r.stats);
      stats["points_dropped_zero_normal"] = cloud.dropped_zero_normals;
      write_json(bake_opts.prefix + "_stats.json", stats);
    } else if (*lpm) {
      lpm_opts.cfg.bake_normals = !lpm_opts.no_normals;
      const TriangleMesh mesh = io::read_mesh(lpm_mesh);
      const PointCloud cloud = io::read_pointcloud(lpm_cloud);
      const BakeResult r = bake_lpm(mesh, cloud, lpm_opts.cfg);
      write_maps(lpm_opts.prefix, r.texture, r.normal_map);
      write_json(lpm_opts.prefix + "_stats.json", stats_json(r.stats));
    } else if (*remesh) {
      remesh_opts.cfg.bake_normals = !remesh_opts.no_normals;
      const TriangleMesh high = io::read_mesh(remesh_high);
      const TriangleMesh low = io::read_mesh(remesh_low);
      const MeshBakeResult r = bake_from_mesh(high, low, remesh_opts.cfg);
      write_maps(remesh_opts.prefix, r.texture, r.normal_map);
      write_json(remesh_opts.prefix + "_stats.json",
                 {{"timings_ms",
                   {{"index", r.stats.index_ms},
                    {"vertex_payload", r.stats.payload_ms},
                    {"ownership", r.stats.ownership_ms},
                    {"sample", r.stats.sample_ms},
                    {"dilate", r.stats.dilate_ms},
                    {"total", r.stats.total_ms}}},
                  {"covered_texels", r.stats.covered_texels},
                  {"far_texels", r.stats.far_texels}});
    } else if (*rend) {
      const Camera cam = parse_camera(rend_camera, rend_size, rend_up);
      Vec3 light = (cam.look_at - cam.position).normalized();
      if (!rend_light.empty()) {
        const auto l = parse_numbers(rend_light, 3, "--light");
        light = Vec3(l[0], l[1], l[2]);
      }
      const TriangleMesh mesh = io::read_mesh(rend_mesh);
      const TexelGrid albedo = io::read_image(rend_albedo);
      const TexelGrid normals = rend_normal.empty() ? TexelGrid() : io::read_image(rend_normal);
      io::write_image(render(mesh, albedo, normals, cam, light).color, rend_out);
    } else if (*cmp) {
      const double e = rmse(io::read_image(cmp_a), io::read_image(cmp_b));
      std::printf("rmse=%.6g psnr=%s\n", e, format_psnr(psnr_from_rmse(e)).c_str());
    } else if (*syn) {
      const SceneKind kind = parse_scene_kind(syn_kind);
      const SyntheticScene scene = synth_scene(kind, syn_points, syn_noise, syn_seed);
      const fs::path dir(syn_out);
      fs::create_directories(dir);
      io::write_pointcloud(scene.cloud, dir / "cloud.ply",
                           syn_ascii ? io::PlyEncoding::Ascii : io::PlyEncoding::BinaryLittleEndian);
      io::write_mesh(scene.low, dir / "low.obj");
      io::write_mesh(scene.high, dir / "high.obj");
      const SceneInfo info{kind, syn_points, syn_noise, syn_seed, scene.mean_spacing};
      write_manifest(manifest_for(scene, info, dir), dir / "manifest.json");
    } else if (*bench) {
      const SceneManifest m = read_manifest(bench_manifest);
      ProfileOptions opts;
      opts.sample_hz = bench_hz;
      const ProfileReport report = profile_pipeline(m, bench_out, opts);
      for (const auto& method : kProfiledMethods) {
        const StageRow& total = report.row(method, "total");
        std::printf("%-7s total_ms=%.1f peak_rss_mb=%.1f mean_psnr=%s\n", method.c_str(),
                    total.wall_ms, double(total.peak_rss_bytes) / (1024.0 * 1024.0),
                    format_psnr(report.mean_psnr(method)).c_str());
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.category() == ErrorCategory::Config ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
