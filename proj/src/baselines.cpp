#include "pointbake/baselines.hpp"

#include <chrono>
#include <cmath>

#include "pointbake/errors.hpp"

namespace pointbake {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void require_uvs(const TriangleMesh& mesh) {
  if (!mesh.has_uvs())
    throw MissingUVs("mesh has no texture coordinates; run `unwrap` first to generate an atlas");
}

Barycentric uv_weights(const Triangle2& t, const Vec2& p) {
  const double area = t.signed_area();
  Barycentric b;
  b.w = Vector3<double>(Triangle2{p, t.b, t.c}.signed_area() / area,
                        Triangle2{t.a, p, t.c}.signed_area() / area,
                        Triangle2{t.a, t.b, p}.signed_area() / area)
            .cwiseMax(0.0);
  b.w /= b.w.sum();
  return b;
}

// Calls fn(face, x, row, weights) for every owned texel; rows run in parallel.
template <class Fn>
void for_each_owned_texel(const TriangleMesh& mesh, const TexelOwnership& own, Fn&& fn) {
  const int W = own.width, H = own.height;
#pragma omp parallel for schedule(dynamic, 4)
  for (int row = 0; row < H; ++row)
    for (int x = 0; x < W; ++x) {
      const std::int32_t f = own.owner[std::size_t(row) * W + x];
      if (f < 0) continue;
      const Vec2 c((x + 0.5) / W, (H - row - 0.5) / H);
      fn(static_cast<std::uint32_t>(f), x, row, uv_weights(mesh.uv_triangle(f), c));
    }
}

UnitVec3 safe_normalized(const Vec3& n, const UnitVec3& fallback) {
  const double len = n.norm();
  return len > 1e-12 ? UnitVec3(n / len) : fallback;
}

}  // namespace

BakeResult bake_lpm(const TriangleMesh& mesh, const PointCloud& cloud, const BakeConfig& cfg) {
  cfg.validate();
  mesh.validate();
  require_uvs(mesh);
  if (cloud.empty()) throw ConfigError("point cloud is empty");
  const auto start = Clock::now();
  auto t = Clock::now();
  const UniformGrid grid(cloud, cfg.effective_cell_size());
  const double grid_ms = elapsed_ms(t);
  t = Clock::now();
  const VertexPayload payload = compute_vertex_payload(mesh, cloud, grid, cfg);
  const double payload_ms = elapsed_ms(t);
  const double setup_ms = elapsed_ms(start);
  BakeResult r = bake_vertex_only(mesh, payload, cfg);
  r.stats.grid_ms = grid_ms;
  r.stats.vertex_payload_ms = payload_ms;
  r.stats.total_ms += setup_ms;
  return r;
}

MeshBakeResult bake_from_mesh(const TriangleMesh& high, const TriangleMesh& low,
                              const BakeConfig& cfg) {
  cfg.validate();
  high.validate();
  low.validate();
  require_uvs(low);
  if (!high.has_colors() || !high.has_normals())
    throw ConfigError("high mesh must carry per-vertex colors and normals");

  const auto start = Clock::now();
  MeshBakeResult out{TexelGrid(cfg.resolution, cfg.resolution),
                     TexelGrid(cfg.resolution, cfg.resolution), {}};
  auto t = Clock::now();
  const TriangleGrid index(high);
  out.stats.index_ms = elapsed_ms(t);

  // Low-mesh vertex payload for texels the high mesh does not reach.
  t = Clock::now();
  VertexPayload low_payload;
  low_payload.colors.resize(low.vertices.size());
  low_payload.normals.resize(low.vertices.size());
  auto high_payload_at = [&](const TriangleGrid::Hit& hit) {
    const Face& hf = high.faces[hit.face];
    const auto& w = hit.closest.weights;
    ColorF c = ColorF::Zero();
    Vec3 n = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      c += w[k] * to_colorf(high.colors[hf[k]]);
      n += w[k] * high.normals[hf[k]];
    }
    return SurfaceSample{c, safe_normalized(n, triangle_normal(high.triangle(hit.face)))};
  };
  const auto nv = static_cast<std::int64_t>(low.vertices.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < nv; ++v) {
    const SurfaceSample s = high_payload_at(index.closest_point(low.vertices[v]));
    low_payload.colors[v] = low.has_colors() ? to_colorf(low.colors[v]) : s.color;
    low_payload.normals[v] = low.has_normals() ? low.normals[v] : s.normal;
  }
  out.stats.payload_ms = elapsed_ms(t);

  t = Clock::now();
  const TexelOwnership own = compute_ownership(low, cfg.resolution, cfg.resolution);
  out.stats.ownership_ms = elapsed_ms(t);

  t = Clock::now();
  std::vector<std::uint8_t> far(own.owner.size(), 0);
  for_each_owned_texel(low, own, [&](std::uint32_t f, int x, int row, const Barycentric& b) {
    const Face& lf = low.faces[f];
    const UnitVec3 face_n = triangle_normal(low.triangle(f));
    Vec3 vertex_n = Vec3::Zero();
    for (int k = 0; k < 3; ++k) vertex_n += b[k] * low_payload.normals[lf[k]];
    const UnitVec3 low_n = safe_normalized(vertex_n, face_n);

    const Vec3 p = apply_barycentric(b, low.triangle(f));
    const TriangleGrid::Hit hit = index.closest_point(p);
    SurfaceSample s;
    if (hit.distance > cfg.d_max) {
      far[std::size_t(row) * own.width + x] = 1;
      s.color = ColorF::Zero();
      for (int k = 0; k < 3; ++k) s.color += b[k] * low_payload.colors[lf[k]];
      s.normal = low_n;
    } else {
      s = high_payload_at(hit);
    }
    out.texture.set(x, row, quantize(s.color));
    out.texture.set_covered(x, row, true);
    out.normal_map.set(x, row, encode_normal(cfg.bake_normals ? s.normal : low_n));
    out.normal_map.set_covered(x, row, true);
  });
  out.stats.sample_ms = elapsed_ms(t);
  for (auto v : far) out.stats.far_texels += v;
  out.stats.covered_texels = out.texture.covered_count();

  t = Clock::now();
  dilate_gutter(out.texture, cfg.gutter);
  dilate_gutter(out.normal_map, cfg.gutter);
  out.stats.dilate_ms = elapsed_ms(t);
  out.stats.total_ms = elapsed_ms(start);
  return out;
}

BakeResult bake_function(const TriangleMesh& mesh, const SurfaceFunction& fn,
                         const BakeConfig& cfg) {
  cfg.validate();
  mesh.validate();
  require_uvs(mesh);
  BakeResult out{TexelGrid(cfg.resolution, cfg.resolution),
                 TexelGrid(cfg.resolution, cfg.resolution), {}};
  const TexelOwnership own = compute_ownership(mesh, cfg.resolution, cfg.resolution);
  for_each_owned_texel(mesh, own, [&](std::uint32_t f, int x, int row, const Barycentric& b) {
    const SurfaceSample s = fn(apply_barycentric(b, mesh.triangle(f)));
    out.texture.set(x, row, quantize(s.color));
    out.texture.set_covered(x, row, true);
    out.normal_map.set(x, row, encode_normal(s.normal));
    out.normal_map.set_covered(x, row, true);
  });
  out.stats.faces = mesh.faces.size();
  out.stats.covered_texels = out.texture.covered_count();
  dilate_gutter(out.texture, cfg.gutter);
  dilate_gutter(out.normal_map, cfg.gutter);
  return out;
}

}  // namespace pointbake
