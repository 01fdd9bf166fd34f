#include "pointbake/transfer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>

#include "pointbake/delaunay.hpp"
#include "pointbake/errors.hpp"
#include "pointbake/predicates.hpp"

namespace pointbake {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Closed-triangle containment with exact predicates; works for either winding.
bool contains(const Vec2& a, const Vec2& b, const Vec2& c, int orientation, const Vec2& p) {
  return predicates::orient2d(a, b, p) * orientation >= 0 &&
         predicates::orient2d(b, c, p) * orientation >= 0 &&
         predicates::orient2d(c, a, p) * orientation >= 0;
}

// Inclusive texel column/row-from-bottom ranges whose centers may fall in
// [lo, hi] along one axis of `n` texels.
std::pair<int, int> center_range(double lo, double hi, int n) {
  const int i0 = std::max(0, static_cast<int>(std::floor(lo * n - 0.5)));
  const int i1 = std::min(n - 1, static_cast<int>(std::ceil(hi * n - 0.5)));
  return {i0, i1};
}

// Weights of p with respect to (a, b, c), clamped to be non-negative.
Vector3<double> interpolation_weights(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const Triangle2 whole{a, b, c};
  const double area = whole.signed_area();
  Vector3<double> w(Triangle2{p, b, c}.signed_area() / area,
                    Triangle2{a, p, c}.signed_area() / area,
                    Triangle2{a, b, p}.signed_area() / area);
  w = w.cwiseMax(0.0);
  const double s = w.sum();
  return s > 0.0 ? Vector3<double>(w / s) : Vector3<double>(1.0 / 3, 1.0 / 3, 1.0 / 3);
}

UnitVec3 blend_normals(const Vector3<double>& w, const UnitVec3& n0, const UnitVec3& n1,
                       const UnitVec3& n2, const UnitVec3& fallback) {
  const Vec3 n = w[0] * n0 + w[1] * n1 + w[2] * n2;
  const double len = n.norm();
  return len > 1e-12 ? UnitVec3(n / len) : fallback;
}

}  // namespace

void BakeConfig::validate() const {
  if (!(d_max > 0.0)) throw ConfigError("d_max must be > 0");
  if (!(angle_max_deg > 0.0 && angle_max_deg <= 180.0))
    throw ConfigError("angle_max_deg must be in (0, 180]");
  if (resolution < 64) throw ConfigError("resolution must be >= 64");
  if (gutter < 0) throw ConfigError("gutter must be >= 0");
  if (vertex_attr_k < 1) throw ConfigError("vertex_attr_k must be >= 1");
  if (grid_cell_size < 0.0) throw ConfigError("grid_cell_size must be >= 0");
}

std::vector<std::uint32_t> gather_points(const Triangle3& t, const PointCloud& cloud,
                                         const UniformGrid& grid, const BakeConfig& cfg) {
  const UnitVec3 n = triangle_normal(t);
  std::vector<std::uint32_t> out;
  for (auto idx : candidates_near_triangle(grid, t, cfg.d_max)) {
    const SurfacePoint& p = cloud[idx];
    if (point_triangle_distance(p.position, t) <= cfg.d_max &&
        normal_angle_deg(p.normal, n) <= cfg.angle_max_deg)
      out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<MappedPoint> map_points(const Triangle3& t, std::span<const std::uint32_t> indices,
                                    const PointCloud& cloud, const Triangle2& uv_tri) {
  std::vector<MappedPoint> out;
  out.reserve(indices.size());
  for (auto idx : indices) {
    const SurfacePoint& p = cloud[idx];
    Barycentric b = barycentric_of(p.position, t);
    if (b.min() < -Barycentric::kInsideTolerance) continue;
    b.w = b.w.cwiseMax(0.0).cwiseMin(1.0);
    b.w /= b.w.sum();
    out.push_back({apply_barycentric(b, uv_tri), p.color, p.normal, idx});
  }
  return out;
}

PatchTriangulation triangulate_patch(const Triangle2& uv_tri, std::span<const MappedPoint> mapped,
                                     double epsilon) {
  PatchTriangulation patch;
  patch.sites = {uv_tri.a, uv_tri.b, uv_tri.c};
  const int orientation = predicates::orient2d(uv_tri.a, uv_tri.b, uv_tri.c);
  if (orientation == 0 || std::abs(uv_tri.signed_area()) <= kMinTriangleArea2) return patch;

  const std::array<Vec2, 3> corners = {uv_tri.a, uv_tri.b, uv_tri.c};
  auto edge_distance = [&](const Vec2& p) {
    double d = std::numeric_limits<double>::infinity();
    for (int e = 0; e < 3; ++e) {
      const Vec2& a = corners[e];
      const Vec2& b = corners[(e + 1) % 3];
      const Vec2 ab = b - a;
      const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      d = std::min(d, (a + t * ab - p).norm());
    }
    return d;
  };

  // Sites at least epsilon from the boundary are also at least epsilon from
  // every corner, so only interior sites need deduplicating.
  std::vector<std::uint32_t> candidates;
  candidates.reserve(mapped.size());
  for (std::uint32_t i = 0; i < mapped.size(); ++i) {
    const Vec2& p = mapped[i].uv;
    const bool strictly_inside = predicates::orient2d(uv_tri.a, uv_tri.b, p) * orientation > 0 &&
                                 predicates::orient2d(uv_tri.b, uv_tri.c, p) * orientation > 0 &&
                                 predicates::orient2d(uv_tri.c, uv_tri.a, p) * orientation > 0;
    if (!strictly_inside || edge_distance(p) < epsilon) ++patch.dropped_on_boundary;
    else candidates.push_back(i);
  }

  // Cells of size epsilon sorted by (row, column): a neighbor closer than
  // epsilon lies in the 3x3 block around a site's cell.
  struct CellEntry {
    std::int64_t cy, cx;
    std::uint32_t i;
    auto operator<=>(const CellEntry&) const = default;
  };
  auto cell_of = [epsilon](const Vec2& p) {
    return std::pair<std::int64_t, std::int64_t>{static_cast<std::int64_t>(std::floor(p.y() / epsilon)),
                                                 static_cast<std::int64_t>(std::floor(p.x() / epsilon))};
  };
  std::vector<CellEntry> cells;
  cells.reserve(candidates.size());
  for (auto i : candidates) {
    const auto [cy, cx] = cell_of(mapped[i].uv);
    cells.push_back({cy, cx, i});
  }
  std::sort(cells.begin(), cells.end());

  // One sweep finds every pair closer than epsilon: same row looking right,
  // and the next row through a pointer that only moves forward.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> close;  // (later, earlier) source order
  std::size_t below = 0;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    const CellEntry& e = cells[a];
    auto test = [&](const CellEntry& o) {
      if ((mapped[o.i].uv - mapped[e.i].uv).norm() < epsilon)
        close.emplace_back(std::max(o.i, e.i), std::min(o.i, e.i));
    };
    for (std::size_t b = a + 1; b < cells.size() && cells[b].cy == e.cy && cells[b].cx <= e.cx + 1; ++b)
      test(cells[b]);
    const CellEntry from{e.cy + 1, e.cx - 1, 0};
    while (below < cells.size() && cells[below] < from) ++below;
    for (std::size_t b = below; b < cells.size() && cells[b].cy == e.cy + 1 && cells[b].cx <= e.cx + 1; ++b)
      test(cells[b]);
  }

  // A site is dropped when an earlier surviving site lies within epsilon.
  std::vector<std::uint8_t> dropped(mapped.size(), 0);
  std::sort(close.begin(), close.end());
  for (const auto& [later, earlier] : close)
    if (!dropped[earlier]) dropped[later] = 1;

  // Mapped points arrive sorted by source index, which fixes who survives.
  std::vector<Vec2> interior_sites;
  interior_sites.reserve(candidates.size());
  for (auto i : candidates) {
    if (dropped[i]) {
      ++patch.dropped_duplicates;
      continue;
    }
    patch.sites.push_back(mapped[i].uv);
    patch.interior.push_back(i);
    interior_sites.push_back(mapped[i].uv);
  }

  const PatchDelaunay dt(uv_tri, interior_sites);
  patch.triangles.reserve(dt.triangles().size());
  for (const auto& t : dt.triangles()) patch.triangles.push_back(t.v);
  return patch;
}

TexelOwnership compute_ownership(const TriangleMesh& mesh, int width, int height) {
  TexelOwnership own;
  own.width = width;
  own.height = height;
  own.owner.assign(std::size_t(width) * height, std::numeric_limits<std::int32_t>::max());
  const auto nfaces = static_cast<std::int64_t>(mesh.faces.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t f = 0; f < nfaces; ++f) {
    const Triangle2 t = mesh.uv_triangle(static_cast<std::size_t>(f));
    const int o = predicates::orient2d(t.a, t.b, t.c);
    if (o == 0) continue;
    const auto [x0, x1] = center_range(std::min({t.a.x(), t.b.x(), t.c.x()}),
                                       std::max({t.a.x(), t.b.x(), t.c.x()}), width);
    const auto [y0, y1] = center_range(std::min({t.a.y(), t.b.y(), t.c.y()}),
                                       std::max({t.a.y(), t.b.y(), t.c.y()}), height);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const Vec2 c((x + 0.5) / width, (y + 0.5) / height);
        if (!contains(t.a, t.b, t.c, o, c)) continue;
        const int row = height - 1 - y;
        std::atomic_ref<std::int32_t> slot(own.owner[std::size_t(row) * width + x]);
        std::int32_t cur = slot.load(std::memory_order_relaxed);
        while (f < cur && !slot.compare_exchange_weak(cur, static_cast<std::int32_t>(f))) {
        }
      }
  }
  for (auto& o : own.owner)
    if (o == std::numeric_limits<std::int32_t>::max()) o = -1;
  return own;
}

FaceBakeCounters bake_face(std::uint32_t face, const TriangleMesh& mesh,
                           const PatchTriangulation& patch, std::span<const MappedPoint> mapped,
                           const VertexPayload& payload, const TexelOwnership& ownership,
                           TexelGrid& texture, TexelGrid& normal_map, const BakeConfig& cfg) {
  FaceBakeCounters counters;
  if (patch.triangles.empty()) return counters;
  const int W = texture.width(), H = texture.height();
  const Face& fv = mesh.faces[face];
  const Triangle2 uv = mesh.uv_triangle(face);
  const UnitVec3 face_normal = triangle_normal(mesh.triangle(face));

  auto site_color = [&](std::uint32_t s) -> ColorF {
    return s < 3 ? payload.colors[fv[s]] : to_colorf(mapped[patch.interior[s - 3]].color);
  };
  auto site_normal = [&](std::uint32_t s) -> UnitVec3 {
    return s < 3 ? payload.normals[fv[s]] : mapped[patch.interior[s - 3]].normal;
  };

  const auto [fx0, fx1] = center_range(std::min({uv.a.x(), uv.b.x(), uv.c.x()}),
                                       std::max({uv.a.x(), uv.b.x(), uv.c.x()}), W);
  const auto [fy0, fy1] = center_range(std::min({uv.a.y(), uv.b.y(), uv.c.y()}),
                                       std::max({uv.a.y(), uv.b.y(), uv.c.y()}), H);
  if (fx1 < fx0 || fy1 < fy0) return counters;
  const int bw = fx1 - fx0 + 1;
  std::vector<std::uint8_t> done(std::size_t(bw) * (fy1 - fy0 + 1), 0);

  auto write = [&](int x, int y, const ColorF& color, const UnitVec3& normal) {
    const int row = H - 1 - y;
    texture.set(x, row, quantize(color));
    texture.set_covered(x, row, true);
    normal_map.set(x, row, encode_normal(normal));
    normal_map.set_covered(x, row, true);
  };
  auto vertex_normal_at = [&](const Vec2& c) {
    const Vector3<double> w = interpolation_weights(uv.a, uv.b, uv.c, c);
    return blend_normals(w, payload.normals[fv[0]], payload.normals[fv[1]],
                         payload.normals[fv[2]], face_normal);
  };

  for (const auto& tri : patch.triangles) {
    const Vec2 &p0 = patch.sites[tri[0]], &p1 = patch.sites[tri[1]], &p2 = patch.sites[tri[2]];
    const auto [x0, x1] = center_range(std::min({p0.x(), p1.x(), p2.x()}),
                                       std::max({p0.x(), p1.x(), p2.x()}), W);
    const auto [y0, y1] = center_range(std::min({p0.y(), p1.y(), p2.y()}),
                                       std::max({p0.y(), p1.y(), p2.y()}), H);
    for (int y = std::max(y0, fy0); y <= std::min(y1, fy1); ++y)
      for (int x = std::max(x0, fx0); x <= std::min(x1, fx1); ++x) {
        std::uint8_t& flag = done[std::size_t(y - fy0) * bw + (x - fx0)];
        if (flag) continue;
        if (ownership.owner[std::size_t(H - 1 - y) * W + x] != static_cast<std::int32_t>(face))
          continue;
        const Vec2 c((x + 0.5) / W, (y + 0.5) / H);
        if (!contains(p0, p1, p2, 1, c)) continue;
        flag = 1;
        const Vector3<double> w = interpolation_weights(p0, p1, p2, c);
        const ColorF color =
            w[0] * site_color(tri[0]) + w[1] * site_color(tri[1]) + w[2] * site_color(tri[2]);
        const UnitVec3 normal =
            cfg.bake_normals ? blend_normals(w, site_normal(tri[0]), site_normal(tri[1]),
                                             site_normal(tri[2]), face_normal)
                             : vertex_normal_at(c);
        write(x, y, color, normal);
        ++counters.written;
      }
  }

  // Texels owned by the face but claimed by no sub-triangle.
  for (int y = fy0; y <= fy1; ++y)
    for (int x = fx0; x <= fx1; ++x) {
      if (done[std::size_t(y - fy0) * bw + (x - fx0)]) continue;
      if (ownership.owner[std::size_t(H - 1 - y) * W + x] != static_cast<std::int32_t>(face))
        continue;
      const Vec2 c((x + 0.5) / W, (y + 0.5) / H);
      std::uint32_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::uint32_t s = 0; s < patch.sites.size(); ++s) {
        const double d = (patch.sites[s] - c).squaredNorm();
        if (d < best) {
          best = d;
          nearest = s;
        }
      }
      write(x, y, site_color(nearest),
            cfg.bake_normals ? site_normal(nearest) : vertex_normal_at(c));
      ++counters.written;
      ++counters.slivers;
    }
  return counters;
}

VertexPayload compute_vertex_payload(const TriangleMesh& mesh, const PointCloud& cloud,
                                     const UniformGrid& grid, const BakeConfig& cfg) {
  VertexPayload out;
  const std::size_t nv = mesh.vertices.size();
  out.colors.resize(nv);
  out.normals.resize(nv);
  const bool own_colors = mesh.has_colors();
  const bool own_normals = mesh.has_normals();

  // Area-weighted face normals, used when blended neighbor normals cancel.
  std::vector<Vec3> geometric(nv, Vec3::Zero());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Triangle3 t = mesh.triangle(f);
    const Vec3 n = (t.v1 - t.v0).cross(t.v2 - t.v0);
    for (auto v : mesh.faces[f]) geometric[v] += n;
  }

  const auto nvi = static_cast<std::int64_t>(nv);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t vi = 0; vi < nvi; ++vi) {
    const auto v = static_cast<std::size_t>(vi);
    if (own_colors) out.colors[v] = to_colorf(mesh.colors[v]);
    if (own_normals) out.normals[v] = mesh.normals[v];
    if (own_colors && own_normals) continue;

    const auto nn = grid.k_nearest(cloud, mesh.vertices[v], std::size_t(cfg.vertex_attr_k));
    ColorF color = ColorF::Zero();
    Vec3 normal = Vec3::Zero();
    double wsum = 0.0;
    const bool exact = !nn.empty() && nn.front().first == 0.0;
    for (const auto& [d, idx] : nn) {
      if (exact && d != 0.0) break;
      const double w = exact ? 1.0 : 1.0 / d;
      color += w * to_colorf(cloud[idx].color);
      normal += w * cloud[idx].normal;
      wsum += w;
    }
    if (!own_colors) out.colors[v] = wsum > 0.0 ? ColorF(color / wsum) : ColorF::Zero();
    if (!own_normals) {
      if (normal.norm() > 1e-12) out.normals[v] = normal.normalized();
      else if (geometric[v].norm() > 0.0) out.normals[v] = geometric[v].normalized();
      else out.normals[v] = UnitVec3(0, 0, 1);
    }
  }
  return out;
}

void dilate_gutter(TexelGrid& grid, int gutter) {
  if (gutter <= 0) return;
  std::vector<std::pair<int, int>> offsets;  // (dy, dx) by increasing distance
  for (int dy = -gutter; dy <= gutter; ++dy)
    for (int dx = -gutter; dx <= gutter; ++dx)
      if (dx != 0 || dy != 0) offsets.emplace_back(dy, dx);
  std::stable_sort(offsets.begin(), offsets.end(), [](const auto& a, const auto& b) {
    return a.first * a.first + a.second * a.second < b.first * b.first + b.second * b.second;
  });
  const TexelGrid source = grid;
  const int W = grid.width(), H = grid.height();
#pragma omp parallel for schedule(static)
  for (int row = 0; row < H; ++row)
    for (int x = 0; x < W; ++x) {
      if (source.covered(x, row)) continue;
      for (const auto& [dy, dx] : offsets) {
        const int r = row + dy, c = x + dx;
        if (r < 0 || c < 0 || r >= H || c >= W || !source.covered(c, r)) continue;
        grid.set(x, row, source.get(c, r));
        break;
      }
    }
}

namespace {

// Shared driver: with transfer_points false every face is baked from its
// vertices alone.
BakeResult bake_faces(const TriangleMesh& mesh, const PointCloud* cloud, const UniformGrid* grid,
                      const VertexPayload& payload, const BakeConfig& cfg, bool transfer_points,
                      BakeStats stats) {
  const auto t_total = Clock::now();
  BakeResult result{TexelGrid(cfg.resolution, cfg.resolution),
                    TexelGrid(cfg.resolution, cfg.resolution), {}};

  auto t0 = Clock::now();
  const TexelOwnership ownership = compute_ownership(mesh, cfg.resolution, cfg.resolution);
  stats.ownership_ms = elapsed_ms(t0);

  const std::size_t nfaces = mesh.faces.size();
  struct FaceStats {
    double gather_ms = 0, map_ms = 0, triangulate_ms = 0, interpolate_ms = 0;
    std::size_t gathered = 0, outside = 0, transferred = 0, dedup = 0, boundary = 0;
    std::size_t slivers = 0;
    bool degenerate_uv = false;
  };
  std::vector<FaceStats> per_face(nfaces);
  const double epsilon = site_epsilon(cfg.resolution);

  const auto nf = static_cast<std::int64_t>(nfaces);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t fi = 0; fi < nf; ++fi) {
    const auto f = static_cast<std::uint32_t>(fi);
    FaceStats& fs = per_face[f];
    const Triangle3 t3 = mesh.triangle(f);
    const Triangle2 uv = mesh.uv_triangle(f);

    std::vector<MappedPoint> mapped;
    if (transfer_points) {
      auto t = Clock::now();
      const auto gathered = gather_points(t3, *cloud, *grid, cfg);
      fs.gather_ms = elapsed_ms(t);
      fs.gathered = gathered.size();
      t = Clock::now();
      mapped = map_points(t3, gathered, *cloud, uv);
      fs.map_ms = elapsed_ms(t);
      fs.outside = gathered.size() - mapped.size();
    }
    auto t = Clock::now();
    const PatchTriangulation patch = triangulate_patch(uv, mapped, epsilon);
    fs.triangulate_ms = elapsed_ms(t);
    fs.transferred = patch.interior_count();
    fs.dedup = patch.dropped_duplicates;
    fs.boundary = patch.dropped_on_boundary;
    fs.degenerate_uv = patch.triangles.empty();

    t = Clock::now();
    const FaceBakeCounters c = bake_face(f, mesh, patch, mapped, payload, ownership,
                                         result.texture, result.normal_map, cfg);
    fs.interpolate_ms = elapsed_ms(t);
    fs.slivers = c.slivers;
  }

  stats.faces = nfaces;
  for (const auto& fs : per_face) {
    stats.gather_ms += fs.gather_ms;
    stats.map_ms += fs.map_ms;
    stats.triangulate_ms += fs.triangulate_ms;
    stats.interpolate_ms += fs.interpolate_ms;
    stats.points_gathered += fs.gathered;
    stats.points_outside += fs.outside;
    stats.points_transferred += fs.transferred;
    stats.points_deduplicated += fs.dedup;
    stats.points_on_boundary += fs.boundary;
    stats.sliver_texels += fs.slivers;
    if (fs.gathered == 0) ++stats.empty_faces;
    if (fs.degenerate_uv) ++stats.degenerate_uv_faces;
  }
  stats.covered_texels = result.texture.covered_count();

  t0 = Clock::now();
  dilate_gutter(result.texture, cfg.gutter);
  dilate_gutter(result.normal_map, cfg.gutter);
  stats.dilate_ms = elapsed_ms(t0);
  stats.total_ms += elapsed_ms(t_total);
  result.stats = stats;
  return result;
}

}  // namespace

BakeResult bake_all(const TriangleMesh& mesh, const PointCloud& cloud, const BakeConfig& cfg) {
  cfg.validate();
  mesh.validate();
  if (!mesh.has_uvs())
    throw MissingUVs("mesh has no texture coordinates; run `unwrap` first to generate an atlas");
  if (cloud.empty()) throw ConfigError("point cloud is empty");

  const auto start = Clock::now();
  BakeStats stats;
  auto t = Clock::now();
  const UniformGrid grid(cloud, cfg.effective_cell_size());
  stats.grid_ms = elapsed_ms(t);
  t = Clock::now();
  const VertexPayload payload = compute_vertex_payload(mesh, cloud, grid, cfg);
  stats.vertex_payload_ms = elapsed_ms(t);
  stats.total_ms = elapsed_ms(start);
  return bake_faces(mesh, &cloud, &grid, payload, cfg, true, stats);
}

BakeResult bake_vertex_only(const TriangleMesh& mesh, const VertexPayload& payload,
                            const BakeConfig& cfg) {
  cfg.validate();
  mesh.validate();
  if (!mesh.has_uvs())
    throw MissingUVs("mesh has no texture coordinates; run `unwrap` first to generate an atlas");
  return bake_faces(mesh, nullptr, nullptr, payload, cfg, false, BakeStats{});
}

}  // namespace pointbake
