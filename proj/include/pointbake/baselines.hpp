#pragma once

// Reference bakers the point transfer is compared against.

#include <functional>

#include "pointbake/transfer.hpp"

namespace pointbake {

/// Vertex-only bake: every face interpolates its three vertex payloads
/// (computed from the cloud unless the mesh carries its own). Shares the
/// per-face code path of bake_all, so it equals bake_all with nothing gathered.
BakeResult bake_lpm(const TriangleMesh& mesh, const PointCloud& cloud, const BakeConfig& cfg);

struct MeshBakeStats {
  double index_ms = 0, payload_ms = 0, ownership_ms = 0, sample_ms = 0, dilate_ms = 0;
  double total_ms = 0;
  std::size_t covered_texels = 0;
  std::size_t far_texels = 0;  // closest high-mesh point beyond d_max; filled from low
};

struct MeshBakeResult {
  TexelGrid texture;
  TexelGrid normal_map;
  MeshBakeStats stats;
};

/// Transfers vertex colors and normals of `high` onto the atlas of `low`:
/// each covered texel is unmapped to 3D on `low`, snapped to the closest point
/// of `high` and given high's interpolated payload there.
MeshBakeResult bake_from_mesh(const TriangleMesh& high, const TriangleMesh& low,
                              const BakeConfig& cfg);

/// Surface attributes at a 3D position, for baking closed-form textures.
struct SurfaceSample {
  ColorF color;
  UnitVec3 normal;
};
using SurfaceFunction = std::function<SurfaceSample(const Vec3&)>;

/// Evaluates `fn` at the 3D position of every texel center owned by a face,
/// then dilates the gutter.
BakeResult bake_function(const TriangleMesh& mesh, const SurfaceFunction& fn,
                         const BakeConfig& cfg);

}  // namespace pointbake
