#pragma once

// Synthetic scenes with closed-form color and geometry, for ground-truth tests.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pointbake/baselines.hpp"
#include "pointbake/render.hpp"

namespace pointbake {

enum class SceneKind { CheckerPlane, StripeSphere, StepWall };

/// "checker-plane", "stripe-sphere" or "step-wall"; anything else throws ConfigError.
SceneKind parse_scene_kind(std::string_view name);
std::string_view scene_kind_name(SceneKind kind);

/// Color and normal of the analytic surface at its point closest to p.
SurfaceSample analytic_surface(SceneKind kind, const Vec3& p);

/// Checker-plane texel mask helper: distance from (x, y) to the nearest
/// checker edge line.
double checker_edge_distance(const Vec3& p);
inline constexpr double kCheckerPeriod = 0.25;

/// Deterministic generator: std::mt19937_64 with doubles built from the top 53
/// bits and normals from the Box-Muller transform, so sample statistics match
/// across platforms.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed);
  double uniform();  // [0, 1)
  double normal();   // standard normal
 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SyntheticScene {
  SceneKind kind;
  PointCloud cloud;
  TriangleMesh low;   // no UVs
  TriangleMesh high;  // vertex colors and normals
  BakeConfig cfg;     // suggested settings for this scene
  std::vector<Camera> cameras;
  UnitVec3 light_dir;
  double mean_spacing = 0.0;  // sqrt(surface area / point count)
};

/// Samples point_count points uniformly by area with procedural colors and
/// exact normals, then offsets positions by isotropic Gaussian noise.
/// Positions are rounded to float32 (the on-disk precision) before colors are
/// evaluated. Throws ConfigError for point_count < 1000 or negative noise.
SyntheticScene synth_scene(SceneKind kind, std::size_t point_count, double noise_sigma,
                           std::uint64_t seed);

/// Subdivided icosahedron on the unit sphere; level 0 has 20 faces.
TriangleMesh icosphere(int level);

}  // namespace pointbake
