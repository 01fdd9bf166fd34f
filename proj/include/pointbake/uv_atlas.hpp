#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointbake/assets.hpp"

namespace pointbake {

/// One chart per mesh face, placed in the unit texture square.
struct UVAtlas {
  std::vector<Triangle2> placements;  // indexed by face, corners in face vertex order
  int resolution = 0;                 // texels per side
  int gutter = 0;                     // texels
  double texels_per_unit = 0.0;       // global similarity scale, texels per scene unit
};

/// Maps every face to UV space by a similarity transform (longest edge on the
/// chart baseline) with one global scale, then shelf-packs the charts by
/// descending height. The largest scale that fits is chosen. Deterministic.
/// Throws AtlasOverflow when even one-texel charts do not fit.
UVAtlas unwrap_per_triangle(const TriangleMesh& mesh, int resolution, int gutter);

/// Returns a copy of mesh whose per-corner UVs come from the atlas.
TriangleMesh with_atlas_uvs(const TriangleMesh& mesh, const UVAtlas& atlas);

struct AtlasReport {
  double occupancy = 0.0;  // fraction of texels whose center lies in some placement
  std::size_t overlapping_texels = 0;
  std::vector<std::uint32_t> overlapping_faces;    // sorted, unique
  std::vector<std::uint32_t> out_of_bounds_faces;  // sorted
  std::vector<std::string> violations;

  bool valid() const { return violations.empty(); }
};

/// Rasterizes each placement conservatively (every texel whose square meets
/// the triangle), dilates by the gutter and reports any texel claimed twice.
AtlasReport validate_atlas(const UVAtlas& atlas, const TriangleMesh& mesh);

}  // namespace pointbake
