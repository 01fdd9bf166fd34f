#pragma once

// JSON scene description consumed by the benchmark and written by `synth`.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pointbake/render.hpp"
#include "pointbake/synth.hpp"
#include "pointbake/transfer.hpp"

namespace pointbake {

struct SceneInfo {
  SceneKind kind = SceneKind::CheckerPlane;
  std::size_t points = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double mean_spacing = 0.0;
};

struct SceneManifest {
  std::filesystem::path cloud;
  std::filesystem::path low_mesh;
  std::optional<std::filesystem::path> high_mesh;
  std::vector<Camera> cameras;
  std::string reference = "analytic";  // or "dense-render"
  BakeConfig cfg;
  UnitVec3 light_dir = UnitVec3(0, 0, -1);
  std::optional<SceneInfo> scene;        // required by the analytic reference
  std::map<std::string, double> scaling;  // desk-scale size relative to full-size scans
};

/// Parses a manifest. Relative paths resolve against the manifest's directory.
/// Missing or malformed fields throw ManifestError naming the field.
SceneManifest read_manifest(const std::filesystem::path& path);

/// Writes paths relative to the manifest directory when they lie beneath it.
void write_manifest(const SceneManifest& manifest, const std::filesystem::path& path);

/// Manifest for a generated scene whose files sit next to the manifest.
SceneManifest manifest_for(const SyntheticScene& scene, const SceneInfo& info,
                           const std::filesystem::path& dir);

}  // namespace pointbake
