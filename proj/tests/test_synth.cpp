#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pointbake/errors.hpp"
#include "pointbake/manifest.hpp"
#include "pointbake/synth.hpp"
#include "support.hpp"

using namespace pointbake;

namespace {

bool same_cloud(const PointCloud& a, const PointCloud& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].position != b[i].position || a[i].normal != b[i].normal || a[i].color != b[i].color)
      return false;
  return true;
}

std::string manifest_error_for(const std::filesystem::path& dir, const std::string& text) {
  const auto path = dir / "m.json";
  std::ofstream(path) << text;
  try {
    read_manifest(path);
  } catch (const ManifestError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(SceneKindNames, ParseAndPrint) {
  for (auto k : {SceneKind::CheckerPlane, SceneKind::StripeSphere, SceneKind::StepWall})
    EXPECT_EQ(parse_scene_kind(scene_kind_name(k)), k);
  EXPECT_THROW(parse_scene_kind("torus"), ConfigError);
}

TEST(SynthScene, RejectsTooFewPointsAndNegativeNoise) {
  EXPECT_THROW(synth_scene(SceneKind::CheckerPlane, 999, 0.0, 1), ConfigError);
  EXPECT_THROW(synth_scene(SceneKind::CheckerPlane, 1000, -1e-3, 1), ConfigError);
}

TEST(SynthScene, NoiselessCheckerColorsAreExact) {
  const auto s = synth_scene(SceneKind::CheckerPlane, 20000, 0.0, 9);
  ASSERT_EQ(s.cloud.size(), 20000u);
  std::size_t white = 0;
  for (const auto& p : s.cloud.points) {
    const int cx = int(std::floor(p.position.x() / kCheckerPeriod));
    const int cy = int(std::floor(p.position.y() / kCheckerPeriod));
    const Rgb8 want = ((cx + cy) % 2 == 0) ? Rgb8{255, 255, 255} : Rgb8{0, 0, 0};
    ASSERT_EQ(p.color, want);
    ASSERT_EQ(p.color, quantize(analytic_surface(SceneKind::CheckerPlane, p.position).color));
    ASSERT_EQ(p.position.z(), 0.0);
    white += p.color[0] == 255;
  }
  EXPECT_NEAR(double(white) / 20000.0, 0.5, 0.02);
}

TEST(SynthScene, MeshSizes) {
  const auto plane = synth_scene(SceneKind::CheckerPlane, 1000, 0.0, 1);
  EXPECT_EQ(plane.low.faces.size(), 2u);
  const auto wall = synth_scene(SceneKind::StepWall, 1000, 0.0, 1);
  EXPECT_EQ(wall.low.faces.size(), 12u);
  const auto sphere = synth_scene(SceneKind::StripeSphere, 1000, 0.0, 1);
  EXPECT_EQ(sphere.low.faces.size(), 320u);
  for (const auto* s : {&plane, &wall, &sphere}) {
    EXPECT_GE(s->high.faces.size(), 100 * s->low.faces.size());
    EXPECT_TRUE(s->high.has_colors());
    EXPECT_TRUE(s->high.has_normals());
    EXPECT_FALSE(s->low.has_uvs());
    EXPECT_FALSE(s->cameras.empty());
    EXPECT_NO_THROW(s->cfg.validate());
    EXPECT_NO_THROW(s->high.validate());
  }
}

TEST(SynthScene, SameSeedSameScene) {
  for (auto k : {SceneKind::CheckerPlane, SceneKind::StepWall}) {
    const auto a = synth_scene(k, 5000, 1e-3, 42);
    const auto b = synth_scene(k, 5000, 1e-3, 42);
    const auto c = synth_scene(k, 5000, 1e-3, 43);
    EXPECT_TRUE(same_cloud(a.cloud, b.cloud));
    EXPECT_FALSE(same_cloud(a.cloud, c.cloud));
    EXPECT_EQ(a.high.vertices, b.high.vertices);
    EXPECT_EQ(a.high.colors, b.high.colors);
  }
}

TEST(SynthScene, PositionsAreFloat32) {
  const auto s = synth_scene(SceneKind::StepWall, 3000, 1e-2, 5);
  for (const auto& p : s.cloud.points)
    for (int k = 0; k < 3; ++k) ASSERT_EQ(p.position[k], double(float(p.position[k])));
}

TEST(SynthScene, SpherePointsNearUnitRadius) {
  const double sigma = 1e-3;
  const auto s = synth_scene(SceneKind::StripeSphere, 200000, sigma, 3);
  std::size_t outside = 0;
  double worst = 0;
  for (const auto& p : s.cloud.points) {
    const double dev = std::abs(p.position.norm() - 1.0);
    outside += dev > 3 * sigma;
    worst = std::max(worst, dev);
    // normals stay those of the underlying sphere point
    ASSERT_NEAR(p.normal.norm(), 1.0, 1e-12);
  }
  // the radial offset is close to N(0, sigma); 0.27% land beyond 3 sigma
  EXPECT_LT(double(outside) / s.cloud.size(), 0.005);
  EXPECT_LT(worst, 6.5 * sigma);

  const auto exact = synth_scene(SceneKind::StripeSphere, 20000, 0.0, 3);
  for (const auto& p : exact.cloud.points) ASSERT_NEAR(p.position.norm(), 1.0, 1e-6);
}

TEST(SynthScene, NoiseHasRequestedSpread) {
  // plane points are displaced along z only by the z component of the noise
  const double sigma = 2e-3;
  const auto s = synth_scene(SceneKind::CheckerPlane, 100000, sigma, 8);
  double sum = 0, sq = 0;
  for (const auto& p : s.cloud.points) {
    sum += p.position.z();
    sq += p.position.z() * p.position.z();
  }
  const double n = double(s.cloud.size());
  EXPECT_NEAR(sum / n, 0.0, 5 * sigma / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sq / n), sigma, 0.02 * sigma);
}

TEST(SceneRng, UniformAndNormalMoments) {
  SceneRng a(1), b(1);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform();
    ASSERT_EQ(u, b.uniform());
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = a.normal();
    ASSERT_EQ(z, b.normal());
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Icosphere, FaceCountsUnitVerticesOutwardWinding) {
  for (int level = 0; level <= 3; ++level) {
    const auto m = icosphere(level);
    EXPECT_EQ(m.faces.size(), 20u << (2 * level));
    EXPECT_EQ(m.vertices.size(), 10u * (1u << (2 * level)) + 2);
    // vertices are stored at float32 precision
    for (const auto& v : m.vertices) EXPECT_NEAR(v.norm(), 1.0, 2e-7);
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
      const Triangle3 t = m.triangle(f);
      EXPECT_GT(triangle_normal(t).dot((t.v0 + t.v1 + t.v2) / 3), 0.0) << "face " << f;
    }
  }
  EXPECT_THROW(icosphere(-1), ConfigError);
}

TEST(Manifest, RoundTripsThroughJson) {
  const auto dir = pointbake::testing::scratch_dir("manifest_roundtrip");
  const auto scene = synth_scene(SceneKind::CheckerPlane, 1000, 1e-3, 77);
  const SceneInfo info{SceneKind::CheckerPlane, 1000, 1e-3, 77, scene.mean_spacing};
  const SceneManifest m = manifest_for(scene, info, dir);
  write_manifest(m, dir / "manifest.json");
  const SceneManifest r = read_manifest(dir / "manifest.json");
  EXPECT_EQ(r.cloud, m.cloud);
  EXPECT_EQ(r.low_mesh, m.low_mesh);
  EXPECT_EQ(r.high_mesh, m.high_mesh);
  EXPECT_EQ(r.reference, m.reference);
  ASSERT_EQ(r.cameras.size(), m.cameras.size());
  for (std::size_t i = 0; i < r.cameras.size(); ++i) {
    EXPECT_EQ(r.cameras[i].position, m.cameras[i].position);
    EXPECT_EQ(r.cameras[i].up, m.cameras[i].up);
    EXPECT_EQ(r.cameras[i].width, m.cameras[i].width);
    EXPECT_EQ(r.cameras[i].far_plane, m.cameras[i].far_plane);
  }
  EXPECT_EQ(r.cfg.d_max, m.cfg.d_max);
  EXPECT_EQ(r.cfg.resolution, m.cfg.resolution);
  EXPECT_EQ(r.cfg.bake_normals, m.cfg.bake_normals);
  EXPECT_EQ(r.light_dir, m.light_dir);
  ASSERT_TRUE(r.scene.has_value());
  EXPECT_EQ(r.scene->seed, 77u);
  EXPECT_EQ(r.scene->kind, SceneKind::CheckerPlane);
  EXPECT_EQ(r.scaling, m.scaling);
  EXPECT_GT(r.scaling.at("full_scale_points"), 0.0);

  // paths are stored relative to the manifest
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("cloud").get<std::string>(), "cloud.ply");
}

TEST(Manifest, MissingFieldsAreNamed) {
  const auto dir = pointbake::testing::scratch_dir("manifest_missing");
  EXPECT_NE(manifest_error_for(dir, "{}").find("cloud"), std::string::npos);
  EXPECT_NE(manifest_error_for(dir, R"({"cloud": "c.ply", "low_mesh": "l.obj",
      "reference": "analytic", "cameras": [{"position": [0,0,1]}]})")
                .find("look_at"),
            std::string::npos);
  EXPECT_NE(manifest_error_for(dir, R"({"cloud": 3})").find("cloud"), std::string::npos);
  EXPECT_NE(manifest_error_for(dir, R"({"cloud": "c.ply", "low_mesh": "l.obj", "reference": "x"})")
                .find("reference"),
            std::string::npos);
  EXPECT_NE(manifest_error_for(dir, "not json").find("JSON"), std::string::npos);
}
