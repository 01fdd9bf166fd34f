#pragma once

// Stage timing and peak-memory comparison of the three baking pipelines.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pointbake/manifest.hpp"

namespace pointbake {

inline const std::vector<std::string> kProfiledMethods = {"lpm", "remesh", "ours"};
inline const std::vector<std::string> kProfiledStages = {"mesh_load", "unwrap", "io", "bake", "total"};

struct StageRow {
  std::string method;
  std::string stage;
  double wall_ms = 0.0;
  std::uint64_t peak_rss_bytes = 0;  // highest sampled resident set during the stage
};

struct FrameScore {
  std::string method;
  int camera = 0;
  double rmse = 0.0;
  double psnr = 0.0;
};

struct ProfileReport {
  std::string reference;
  std::vector<StageRow> rows;
  std::vector<FrameScore> frames;
  std::map<std::string, std::uint64_t> kernel_peak_rss_bytes;  // from wait4, per method
  std::map<std::string, std::map<std::string, double>> diagnostics;

  const StageRow& row(const std::string& method, const std::string& stage) const;
  double mean_psnr(const std::string& method) const;
};

struct ProfileOptions {
  double sample_hz = 200.0;
};

/// Runs each method in its own forked process, one after another, so memory
/// peaks do not mix. Textures land in out_dir/textures and rendered frames in
/// out_dir/frames, next to report.csv and summary.json.
ProfileReport profile_pipeline(const SceneManifest& manifest, const std::filesystem::path& out_dir,
                               const ProfileOptions& options = {});

void write_report_csv(const ProfileReport& report, const std::filesystem::path& path);
void write_report_json(const ProfileReport& report, const std::filesystem::path& path);

/// Current resident set size of this process in bytes (0 if unavailable).
std::uint64_t current_rss_bytes();

}  // namespace pointbake
