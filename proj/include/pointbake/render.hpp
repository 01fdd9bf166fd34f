#pragma once

// Offscreen perspective rasterizer with one directional light.

#include <vector>

#include "pointbake/assets.hpp"

namespace pointbake {

struct Camera {
  Vec3 position = Vec3(0, 0, 3);
  Vec3 look_at = Vec3::Zero();
  UnitVec3 up = UnitVec3(0, 1, 0);
  double vertical_fov_deg = 45.0;
  int width = 512;
  int height = 512;
  double near_plane = 0.01;
  double far_plane = 100.0;

  /// Throws ConfigError on a degenerate camera.
  void validate() const;
};

struct RenderedFrame {
  TexelGrid color;            // coverage marks pixels hit by geometry
  std::vector<double> depth;  // view-space distance along the view axis; +inf on background
};

/// Renders a textured mesh. Shading is albedo * (0.2 + 0.8 * max(0, n . -light))
/// with n decoded from `normal_map`. An empty normal map (0 x 0) falls back to
/// interpolated vertex normals, or face normals when the mesh has none.
/// Textures are sampled nearest-texel. Background is black.
RenderedFrame render(const TriangleMesh& mesh, const TexelGrid& texture,
                     const TexelGrid& normal_map, const Camera& camera, const UnitVec3& light_dir);

/// Same rasterizer, shading interpolated vertex colors and normals.
RenderedFrame render_vertex_colors(const TriangleMesh& mesh, const Camera& camera,
                                   const UnitVec3& light_dir);

}  // namespace pointbake
