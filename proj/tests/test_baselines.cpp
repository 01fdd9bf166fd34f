#include <gtest/gtest.h>

#include <cmath>

#include "pointbake/baselines.hpp"
#include "pointbake/errors.hpp"
#include "pointbake/metrics.hpp"
#include "pointbake/render.hpp"
#include "pointbake/uv_atlas.hpp"
#include "support.hpp"

using namespace pointbake;
using pointbake::testing::Rng;

namespace {

// Unit quad in the z = 0 plane, UVs inset so both faces fill most of the atlas.
TriangleMesh quad() {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  m.uvs = {Vec2(0.05, 0.05), Vec2(0.95, 0.05), Vec2(0.95, 0.95), Vec2(0.05, 0.95)};
  m.face_uvs = m.faces;
  return m;
}

// Finely tessellated copy of the unit quad with per-vertex attributes from f.
TriangleMesh fine_quad(int n, const std::function<Rgb8(double, double)>& f) {
  TriangleMesh m;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const double x = double(i) / n, y = double(j) / n;
      m.vertices.emplace_back(x, y, 0);
      m.normals.emplace_back(0, 0, 1);
      m.colors.push_back(f(x, y));
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::uint32_t v = j * (n + 1) + i;
      m.faces.push_back({v, v + 1, v + n + 2});
      m.faces.push_back({v, v + n + 2, v + n + 1});
    }
  return m;
}

PointCloud cloud_of(const std::vector<SurfacePoint>& pts) {
  PointCloud c;
  c.points = pts;
  c.recompute_bounds();
  return c;
}

BakeConfig cfg_at(int res) {
  BakeConfig c;
  c.resolution = res;
  c.gutter = 2;
  c.d_max = 0.01;
  return c;
}

TexelGrid filled(int w, int h, Rgb8 c) {
  TexelGrid g(w, h);
  for (int r = 0; r < h; ++r)
    for (int x = 0; x < w; ++x) {
      g.set(x, r, c);
      g.set_covered(x, r, true);
    }
  return g;
}

// Triangle well beyond the view of a 90 degree camera at distance 1.
TriangleMesh screen_filler(double z = 0.0) {
  TriangleMesh m;
  m.vertices = {Vec3(-3, -3, z), Vec3(7, -3, z), Vec3(-3, 7, z)};
  m.faces = {{0, 1, 2}};
  m.uvs = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  m.face_uvs = m.faces;
  return m;
}

Camera front_camera(int size = 32) {
  Camera c;
  c.position = Vec3(0, 0, 1);
  c.look_at = Vec3::Zero();
  c.vertical_fov_deg = 90;
  c.width = c.height = size;
  return c;
}

}  // namespace

TEST(BakeLpm, UniformVertexColorGivesUniformTexture) {
  TriangleMesh m = quad();
  m.colors.assign(4, Rgb8{40, 80, 120});
  m.normals.assign(4, Vec3(0, 0, 1));
  const auto c = cloud_of({{Vec3(0.5, 0.5, 0), Vec3(0, 0, 1), {255, 0, 0}}});
  const auto r = bake_lpm(m, c, cfg_at(64));
  EXPECT_GT(r.texture.covered_count(), 0u);
  for (int row = 0; row < 64; ++row)
    for (int x = 0; x < 64; ++x)
      if (r.texture.covered(x, row)) EXPECT_EQ(r.texture.get(x, row), (Rgb8{40, 80, 120}));
}

TEST(BakeLpm, CornerColorsMatchDirectBarycentricEvaluation) {
  TriangleMesh m = quad();
  const std::array<ColorF, 4> corner = {ColorF(255, 0, 0), ColorF(0, 255, 0), ColorF(0, 0, 255),
                                        ColorF(255, 255, 255)};
  for (const auto& c : corner) m.colors.push_back(quantize(c));
  m.normals.assign(4, Vec3(0, 0, 1));
  const auto c = cloud_of({{Vec3(0.5, 0.5, 0), Vec3(0, 0, 1), {0, 0, 0}}});
  const int res = 64;
  const auto r = bake_lpm(m, c, cfg_at(res));
  Rng rng(3);
  int checked = 0;
  for (int s = 0; s < 200; ++s) {
    const int x = rng.integer(5, 58), y = rng.integer(5, 58);
    const Vec2 uv((x + 0.5) / res, (y + 0.5) / res);
    // quad coordinates of the texel center
    const double u = (uv.x() - 0.05) / 0.9, v = (uv.y() - 0.05) / 0.9;
    if (std::abs(u - v) < 0.02) continue;  // too close to the diagonal
    const ColorF want = u > v ? ColorF((1 - u) * corner[0] + (u - v) * corner[1] + v * corner[2])
                              : ColorF((1 - v) * corner[0] + u * corner[2] + (v - u) * corner[3]);
    const Rgb8 got = r.texture.get(x, res - 1 - y);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(got[k], want[k], 1.0);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(BakeLpm, EqualsPointBakeWithNothingGathered) {
  Rng rng(4);
  TriangleMesh m = quad();
  PointCloud c;
  for (int i = 0; i < 3000; ++i)
    c.points.push_back({Vec3(rng.uniform(), rng.uniform(), 0.01), Vec3(0, 0, 1), rng.color()});
  c.recompute_bounds();
  auto cfg = cfg_at(128);
  cfg.d_max = 1e-12;
  const auto lpm = bake_lpm(m, c, cfg);
  const auto ours = bake_all(m, c, cfg);
  EXPECT_TRUE(lpm.texture == ours.texture);
  EXPECT_TRUE(lpm.normal_map == ours.normal_map);
}

TEST(BakeFromMesh, SelfTransferMatchesLpm) {
  Rng rng(5);
  TriangleMesh m = fine_quad(6, [&](double, double) { return rng.color(); });
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    m.vertices[v].z() = 0.1 * std::sin(7.0 * m.vertices[v].x() + 3.0 * m.vertices[v].y());
  for (auto& n : m.normals) n = rng.unit();
  m = with_atlas_uvs(m, unwrap_per_triangle(m, 256, 2));
  const auto c = cloud_of({{Vec3(0.5, 0.5, 0), Vec3(0, 0, 1), {0, 0, 0}}});
  const auto cfg = cfg_at(256);
  const auto remesh = bake_from_mesh(m, m, cfg);
  const auto lpm = bake_lpm(m, c, cfg);
  EXPECT_EQ(remesh.stats.far_texels, 0u);
  int worst = 0;
  for (int row = 0; row < 256; ++row)
    for (int x = 0; x < 256; ++x) {
      ASSERT_EQ(remesh.texture.covered(x, row), lpm.texture.covered(x, row));
      const Rgb8 a = remesh.texture.get(x, row), b = lpm.texture.get(x, row);
      for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(int(a[k]) - int(b[k])));
    }
  EXPECT_LE(worst, 1);
}

TEST(BakeFromMesh, PlaneReproducesLinearGradient) {
  const auto high = fine_quad(40, [](double x, double y) {
    return Rgb8{std::uint8_t(std::lround(255 * x)), std::uint8_t(std::lround(255 * y)), 0};
  });
  const int res = 128;
  const auto r = bake_from_mesh(high, quad(), cfg_at(res));
  EXPECT_EQ(r.stats.far_texels, 0u);
  for (int y = 8; y < res - 8; y += 3)
    for (int x = 8; x < res - 8; x += 3) {
      const double u = ((x + 0.5) / res - 0.05) / 0.9, v = ((y + 0.5) / res - 0.05) / 0.9;
      const Rgb8 got = r.texture.get(x, res - 1 - y);
      // vertex colors are rounded, so allow their half unit on top of one unit of quantization
      EXPECT_NEAR(got[0], 255 * u, 1.5);
      EXPECT_NEAR(got[1], 255 * v, 1.5);
      EXPECT_EQ(got[2], 0);
    }
}

TEST(BakeFromMesh, FarTexelsFallBackToLowPayload) {
  auto high = fine_quad(4, [](double, double) { return Rgb8{255, 255, 255}; });
  for (auto& v : high.vertices) v.z() += 1.0;
  TriangleMesh low = quad();
  low.colors.assign(4, Rgb8{7, 7, 7});
  low.normals.assign(4, Vec3(0, 0, 1));
  const auto r = bake_from_mesh(high, low, cfg_at(64));
  EXPECT_EQ(r.stats.far_texels, r.stats.covered_texels);
  EXPECT_EQ(r.texture.get(32, 32), (Rgb8{7, 7, 7}));
}

TEST(BakeFromMesh, HighMeshWithoutColorsRejected) {
  TriangleMesh high = quad();
  EXPECT_THROW(bake_from_mesh(high, quad(), cfg_at(64)), ConfigError);
}

TEST(BakeFunction, EvaluatesClosedFormAtTexelCenters) {
  const int res = 64;
  const auto r = bake_function(
      quad(), [](const Vec3& p) { return SurfaceSample{ColorF(200 * p.x(), 0, 50), Vec3(0, 0, 1)}; },
      cfg_at(res));
  for (int x = 4; x < 60; ++x) {
    const double u = ((x + 0.5) / res - 0.05) / 0.9;
    EXPECT_NEAR(r.texture.get(x, 30)[0], 200 * u, 0.5 + 1e-9);
  }
}

TEST(Render, FacingLightGivesFullWhite) {
  const auto f = render(screen_filler(), filled(8, 8, {255, 255, 255}), TexelGrid(), front_camera(),
                        Vec3(0, 0, -1));
  for (int r = 0; r < 32; ++r)
    for (int x = 0; x < 32; ++x) ASSERT_EQ(f.color.get(x, r), (Rgb8{255, 255, 255}));
}

TEST(Render, PerpendicularLightGivesAmbientFloor) {
  const auto f = render(screen_filler(), filled(8, 8, {255, 255, 255}), TexelGrid(), front_camera(),
                        Vec3(1, 0, 0));
  for (int r = 0; r < 32; ++r)
    for (int x = 0; x < 32; ++x)
      for (int k = 0; k < 3; ++k) ASSERT_NEAR(f.color.get(x, r)[k], 51, 1);
}

TEST(Render, NormalMapDrivesShading) {
  // encoded (1, 0, 0) lit from -x gives full brightness on a z-facing face
  const auto f = render(screen_filler(), filled(8, 8, {255, 255, 255}),
                        filled(8, 8, encode_normal(Vec3(1, 0, 0))), front_camera(), Vec3(-1, 0, 0));
  EXPECT_GE(f.color.get(16, 16)[0], 254);
}

TEST(Render, NearTriangleOccludesFarOneRegardlessOfOrder) {
  for (int order = 0; order < 2; ++order) {
    TriangleMesh m;
    const TriangleMesh far = screen_filler(0.0);
    const TriangleMesh near = screen_filler(0.5);
    const TriangleMesh& first = order == 0 ? near : far;
    const TriangleMesh& second = order == 0 ? far : near;
    m.vertices = first.vertices;
    m.vertices.insert(m.vertices.end(), second.vertices.begin(), second.vertices.end());
    m.faces = {{0, 1, 2}, {3, 4, 5}};
    const Rgb8 red{255, 0, 0}, white{255, 255, 255};
    m.colors = order == 0 ? std::vector<Rgb8>{red, red, red, white, white, white}
                          : std::vector<Rgb8>{white, white, white, red, red, red};
    const auto f = render_vertex_colors(m, front_camera(), Vec3(0, 0, -1));
    EXPECT_EQ(f.color.get(16, 16), red) << "order " << order;
    EXPECT_NEAR(f.depth[16 * 32 + 16], 0.5, 1e-9);
  }
}

TEST(Render, BackgroundIsBlackWithInfiniteDepth) {
  Camera cam = front_camera();
  cam.look_at = Vec3(0, 0, 2);  // facing away from the geometry
  const auto f = render(screen_filler(), filled(8, 8, {255, 255, 255}), TexelGrid(), cam,
                        Vec3(0, 0, -1));
  EXPECT_EQ(f.color.covered_count(), 0u);
  EXPECT_EQ(f.color.get(3, 3), (Rgb8{0, 0, 0}));
  EXPECT_TRUE(std::isinf(f.depth[0]));
}

TEST(Render, DegenerateCameraRejected) {
  Camera cam = front_camera();
  cam.look_at = cam.position;
  EXPECT_THROW(render(screen_filler(), filled(8, 8, {}), TexelGrid(), cam, Vec3(0, 0, -1)),
               ConfigError);
  cam = front_camera();
  cam.near_plane = 0;
  EXPECT_THROW(cam.validate(), ConfigError);
  cam = front_camera();
  cam.far_plane = cam.near_plane;
  EXPECT_THROW(cam.validate(), ConfigError);
  cam = front_camera();
  cam.vertical_fov_deg = 180;
  EXPECT_THROW(cam.validate(), ConfigError);
}

TEST(RenderProperty, Deterministic) {
  Rng rng(6);
  TriangleMesh m = fine_quad(20, [&](double, double) { return rng.color(); });
  for (auto& v : m.vertices) v.z() = 0.2 * std::sin(5 * v.x()) * std::cos(4 * v.y());
  m = with_atlas_uvs(m, unwrap_per_triangle(m, 256, 2));
  TexelGrid tex(256, 256);
  for (auto& b : tex.data()) b = static_cast<std::uint8_t>(rng.integer(0, 255));
  Camera cam;
  cam.position = Vec3(0.5, -1.0, 1.5);
  cam.look_at = Vec3(0.5, 0.5, 0);
  cam.width = 160;
  cam.height = 120;
  const auto a = render(m, tex, TexelGrid(), cam, Vec3(0.3, 0.2, -1).normalized());
  const auto b = render(m, tex, TexelGrid(), cam, Vec3(0.3, 0.2, -1).normalized());
  EXPECT_TRUE(a.color == b.color);
  EXPECT_GT(a.color.covered_count(), 1000u);
}

TEST(Metrics, IdenticalImagesHaveZeroErrorAndInfinitePsnr) {
  const auto a = filled(4, 4, {1, 2, 3});
  EXPECT_EQ(rmse(a, a), 0.0);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_EQ(format_psnr(psnr(a, a)), "identical");
}

TEST(Metrics, BlackVersusWhite) {
  const auto a = filled(3, 5, {0, 0, 0}), b = filled(3, 5, {255, 255, 255});
  EXPECT_DOUBLE_EQ(rmse(a, b), 255.0);
  EXPECT_NEAR(psnr(a, b), 0.0, 1e-12);
}

TEST(Metrics, HandComputedTwoByTwo) {
  TexelGrid a(2, 2), b(2, 2);
  a.set(0, 0, {10, 0, 0});
  b.set(1, 1, {0, 0, 20});
  a.set(1, 0, {5, 5, 5});
  // squared differences: 100 + 400 + 3 * 25 = 575 over 12 channels
  EXPECT_DOUBLE_EQ(rmse(a, b), std::sqrt(575.0 / 12.0));
  EXPECT_DOUBLE_EQ(psnr(a, b), 20.0 * std::log10(255.0 / std::sqrt(575.0 / 12.0)));
}

TEST(Metrics, MaskedRmseUsesOnlySelectedTexels) {
  TexelGrid a(2, 1), b(2, 1);
  b.set(1, 0, {255, 255, 255});
  const std::vector<std::uint8_t> first{1, 0}, second{0, 1}, none{0, 0};
  EXPECT_EQ(masked_rmse(a, b, first), 0.0);
  EXPECT_DOUBLE_EQ(masked_rmse(a, b, second), 255.0);
  EXPECT_EQ(masked_rmse(a, b, none), 0.0);
}

TEST(Metrics, SizeMismatchRejected) {
  EXPECT_THROW(rmse(TexelGrid(2, 2), TexelGrid(2, 3)), DimensionError);
  EXPECT_THROW(psnr(TexelGrid(3, 2), TexelGrid(2, 2)), DimensionError);
}

TEST(Metrics, FormatPsnr) { EXPECT_EQ(format_psnr(31.25), "31.25"); }

TEST(MetricsProperty, SymmetryAndTriangleInequality) {
  Rng rng(7);
  auto random_grid = [&] {
    TexelGrid g(16, 12);
    for (auto& b : g.data()) b = static_cast<std::uint8_t>(rng.integer(0, 255));
    return g;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_grid(), b = random_grid(), c = random_grid();
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_EQ(rmse(a, b), rmse(b, a));
    // rmse is a scaled Euclidean norm of the difference vector
    EXPECT_LE(rmse(a, c), rmse(a, b) + rmse(b, c) + 1e-12);
  }
}
