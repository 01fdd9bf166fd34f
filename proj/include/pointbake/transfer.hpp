#pragma once

// Point-based detail transfer: for every mesh face, gather the cloud points
// lying on it, carry them into the face's UV triangle with fixed barycentric
// coordinates, triangulate corners plus carried points, and fill each texel
// of the face by interpolating inside its containing sub-triangle.

#include <cstdint>
#include <span>
#include <vector>

#include "pointbake/assets.hpp"
#include "pointbake/spatial_index.hpp"

namespace pointbake {

struct BakeConfig {
  double d_max = 4.0;           // scene units
  double angle_max_deg = 120.0;
  int resolution = 1024;        // texels per side
  int gutter = 2;               // texels
  bool bake_normals = true;
  int vertex_attr_k = 8;
  /// Grid cell size for point gathering; 0 selects 2 * d_max.
  double grid_cell_size = 0.0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  double effective_cell_size() const { return grid_cell_size > 0.0 ? grid_cell_size : 2.0 * d_max; }
};

struct MappedPoint {
  Vec2 uv;
  Rgb8 color;
  UnitVec3 normal;
  std::uint32_t source_index;
};

/// Color and normal attached to each mesh vertex.
struct VertexPayload {
  std::vector<ColorF> colors;
  std::vector<UnitVec3> normals;
};

struct PatchTriangulation {
  /// sites[0..2] are the UV corners in face order; sites[3 + i] carries
  /// interior[i] of the mapped points that survived deduplication.
  std::vector<Vec2> sites;
  std::vector<std::uint32_t> interior;  // indices into the mapped-point list
  std::vector<std::array<std::uint32_t, 3>> triangles;  // counter-clockwise
  std::size_t dropped_duplicates = 0;
  std::size_t dropped_on_boundary = 0;

  std::size_t interior_count() const { return interior.size(); }
};

/// Points with distance <= d_max to t and normal within angle_max_deg of the
/// triangle normal, sorted by index.
std::vector<std::uint32_t> gather_points(const Triangle3& t, const PointCloud& cloud,
                                         const UniformGrid& grid, const BakeConfig& cfg);

/// Carries gathered points into uv_tri, keeping their barycentric coordinates.
/// Points whose projection falls outside t are discarded.
std::vector<MappedPoint> map_points(const Triangle3& t, std::span<const std::uint32_t> indices,
                                    const PointCloud& cloud, const Triangle2& uv_tri);

/// Coincidence tolerance for patch sites: one thousandth of a texel.
inline double site_epsilon(int resolution) { return 1e-3 / resolution; }

/// Delaunay triangulation of the UV corners plus the mapped points. Sites
/// closer than `epsilon` to an earlier site (corners first, then ascending
/// source index) or to the triangle boundary are dropped, so k surviving
/// sites always give 2k + 1 sub-triangles.
PatchTriangulation triangulate_patch(const Triangle2& uv_tri, std::span<const MappedPoint> mapped,
                                     double epsilon);

/// Per-texel owner face (lowest face index whose UV triangle contains the
/// texel center), -1 where no face does.
struct TexelOwnership {
  int width = 0, height = 0;
  std::vector<std::int32_t> owner;
};

TexelOwnership compute_ownership(const TriangleMesh& mesh, int width, int height);

struct FaceBakeCounters {
  std::size_t written = 0;
  std::size_t slivers = 0;
};

/// Writes every texel owned by `face`: locates its sub-triangle (lowest index
/// on ties), interpolates the sites' colors linearly and their normals by
/// blend-and-renormalize, then marks coverage. Texels found in no
/// sub-triangle take the nearest site's payload and are counted as slivers.
FaceBakeCounters bake_face(std::uint32_t face, const TriangleMesh& mesh,
                           const PatchTriangulation& patch, std::span<const MappedPoint> mapped,
                           const VertexPayload& payload, const TexelOwnership& ownership,
                           TexelGrid& texture, TexelGrid& normal_map, const BakeConfig& cfg);

/// Mesh vertex colors/normals when present, otherwise inverse-distance
/// weighted averages of the k nearest cloud points.
VertexPayload compute_vertex_payload(const TriangleMesh& mesh, const PointCloud& cloud,
                                     const UniformGrid& grid, const BakeConfig& cfg);

struct BakeStats {
  // Stage times in milliseconds. Per-face stages are summed over worker
  // threads, so they equal wall time when running single-threaded.
  double grid_ms = 0, vertex_payload_ms = 0, ownership_ms = 0;
  double gather_ms = 0, map_ms = 0, triangulate_ms = 0, interpolate_ms = 0, dilate_ms = 0;
  double total_ms = 0;

  std::size_t faces = 0;
  std::size_t points_gathered = 0;
  std::size_t points_outside = 0;
  std::size_t points_transferred = 0;  // surviving interior sites
  std::size_t points_deduplicated = 0;
  std::size_t points_on_boundary = 0;
  std::size_t covered_texels = 0;
  std::size_t sliver_texels = 0;
  std::size_t empty_faces = 0;  // faces with zero gathered points
  std::size_t degenerate_uv_faces = 0;
};

struct BakeResult {
  TexelGrid texture;
  TexelGrid normal_map;
  BakeStats stats;
};

/// Full transfer. The mesh must carry UVs (throws MissingUVs otherwise).
BakeResult bake_all(const TriangleMesh& mesh, const PointCloud& cloud, const BakeConfig& cfg);

/// Fills each uncovered texel within `gutter` texels (chessboard distance) of
/// coverage with its nearest covered texel; ties go to the first in row-major
/// scan order of the offset window.
void dilate_gutter(TexelGrid& grid, int gutter);

/// Builds the LPM-style result shared by the baseline: every face baked from
/// its three vertices only.
BakeResult bake_vertex_only(const TriangleMesh& mesh, const VertexPayload& payload,
                            const BakeConfig& cfg);

}  // namespace pointbake
