#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "pointbake/errors.hpp"
#include "pointbake/io.hpp"
#include "pointbake/profile.hpp"
#include "pointbake/synth.hpp"
#include "support.hpp"

using namespace pointbake;
namespace fs = std::filesystem;

namespace {

// Small checker scene on disk with shrunken textures and frames.
SceneManifest small_scene(const fs::path& dir) {
  SyntheticScene scene = synth_scene(SceneKind::CheckerPlane, 2000, 1e-3, 12);
  io::write_pointcloud(scene.cloud, dir / "cloud.ply");
  io::write_mesh(scene.low, dir / "low.obj");
  io::write_mesh(scene.high, dir / "high.obj");
  const SceneInfo info{SceneKind::CheckerPlane, 2000, 1e-3, 12, scene.mean_spacing};
  SceneManifest m = manifest_for(scene, info, dir);
  m.cfg.resolution = 128;
  m.cfg.d_max = 0.05;
  for (auto& c : m.cameras) c.width = c.height = 48;
  return m;
}

}  // namespace

TEST(ProfilePipeline, ReportsEveryMethodAndStage) {
  const auto dir = pointbake::testing::scratch_dir("profile_stages");
  const auto m = small_scene(dir);
  const auto report = profile_pipeline(m, dir / "out");

  EXPECT_EQ(report.rows.size(), kProfiledMethods.size() * kProfiledStages.size());
  for (const auto& method : kProfiledMethods) {
    for (const auto& stage : kProfiledStages) {
      const StageRow& r = report.row(method, stage);
      EXPECT_GE(r.wall_ms, 0.0) << method << "/" << stage;
      EXPECT_GT(r.peak_rss_bytes, 0u) << method << "/" << stage;
    }
    EXPECT_GT(report.row(method, "total").wall_ms, 0.0);
    EXPECT_GT(report.row(method, "bake").wall_ms, 0.0);
    EXPECT_GT(report.kernel_peak_rss_bytes.at(method), 0u);
    EXPECT_TRUE(fs::exists(dir / "out" / "textures" / (method + "_albedo.png")));
    for (std::size_t c = 0; c < m.cameras.size(); ++c)
      EXPECT_TRUE(fs::exists(dir / "out" / "frames" / (method + "_cam" + std::to_string(c) + ".png")));
  }
  EXPECT_EQ(report.frames.size(), kProfiledMethods.size() * m.cameras.size());
  EXPECT_THROW(report.row("ours", "nonexistent"), ConfigError);

  write_report_csv(report, dir / "report.csv");
  write_report_json(report, dir / "summary.json");
  std::ifstream csv(dir / "report.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_NE(header.find("method"), std::string::npos);
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) lines += !line.empty();
  EXPECT_EQ(lines, report.rows.size());
  std::ifstream js(dir / "summary.json");
  const auto summary = nlohmann::json::parse(js);
  EXPECT_TRUE(summary.is_object());
}

TEST(ProfilePipeline, ImageScoresRepeatExactly) {
  const auto dir = pointbake::testing::scratch_dir("profile_repeat");
  const auto m = small_scene(dir);
  const auto a = profile_pipeline(m, dir / "a");
  const auto b = profile_pipeline(m, dir / "b");
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    EXPECT_EQ(a.frames[i].method, b.frames[i].method);
    EXPECT_EQ(a.frames[i].rmse, b.frames[i].rmse);
  }
  for (const auto& method : kProfiledMethods) EXPECT_EQ(a.mean_psnr(method), b.mean_psnr(method));
}

TEST(ProfilePipeline, MissingInputsAreManifestErrors) {
  const auto dir = pointbake::testing::scratch_dir("profile_missing");
  auto m = small_scene(dir);

  auto no_high = m;
  no_high.high_mesh.reset();
  try {
    profile_pipeline(no_high, dir / "out");
    FAIL() << "expected ManifestError";
  } catch (const ManifestError& e) {
    EXPECT_NE(std::string(e.what()).find("high_mesh"), std::string::npos);
  }

  auto bad_cloud = m;
  bad_cloud.cloud = dir / "absent.ply";
  EXPECT_THROW(profile_pipeline(bad_cloud, dir / "out"), ManifestError);

  auto no_cams = m;
  no_cams.cameras.clear();
  EXPECT_THROW(profile_pipeline(no_cams, dir / "out"), ManifestError);

  auto no_scene = m;
  no_scene.scene.reset();
  EXPECT_THROW(profile_pipeline(no_scene, dir / "out"), ManifestError);

  ProfileOptions slow;
  slow.sample_hz = 1.0;
  EXPECT_THROW(profile_pipeline(m, dir / "out", slow), ConfigError);
}

TEST(CurrentRss, IsPositive) { EXPECT_GT(current_rss_bytes(), 0u); }
