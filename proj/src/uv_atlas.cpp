#include "pointbake/uv_atlas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pointbake/errors.hpp"
#include "pointbake/predicates.hpp"

namespace pointbake {
namespace {

// A face laid flat: corner k of the face sits at local[k]; the longest edge
// runs along +x from the origin and the opposite corner has y = height.
struct Chart {
  std::array<Vec2, 3> local;
  double width = 0.0;
  double height = 0.0;
};

Chart flatten(const Triangle3& t) {
  int e = 0;
  double longest = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double len = (t[(k + 1) % 3] - t[k]).norm();
    if (len > longest) {
      longest = len;
      e = k;
    }
  }
  const Vec3& a = t[e];
  const Vec3& b = t[(e + 1) % 3];
  const Vec3& c = t[(e + 2) % 3];
  const Vec3 ab = b - a, ac = c - a;
  Chart ch;
  ch.width = longest;
  ch.height = ab.cross(ac).norm() / longest;
  ch.local[e] = Vec2(0.0, 0.0);
  ch.local[(e + 1) % 3] = Vec2(longest, 0.0);
  ch.local[(e + 2) % 3] = Vec2(ac.dot(ab) / longest, ch.height);
  return ch;
}

struct Slot {
  int x = 0, y = 0;
};

int box_size(double extent, double scale) {
  return std::max(1, static_cast<int>(std::ceil(extent * scale)));
}

// Shelf packing in texel units. A chart whose box starts at integer X with
// width w meets the closed texel squares X - 1 .. X + w; dilated by the gutter
// that span must stay inside the grid and clear of the next box's span.
bool pack(const std::vector<Chart>& charts, const std::vector<std::uint32_t>& order, double scale,
          int resolution, int gutter, std::vector<Slot>* slots) {
  const int gap = 2 * gutter + 2;
  int x = gutter + 1, y = gutter + 1, shelf = 0;
  if (slots) slots->assign(charts.size(), Slot{});
  for (auto f : order) {
    const int w = box_size(charts[f].width, scale);
    const int h = box_size(charts[f].height, scale);
    if (w + 2 * gutter + 2 > resolution) return false;
    if (x + w + gutter + 1 > resolution) {
      y += shelf + gap;
      x = gutter + 1;
      shelf = 0;
    }
    if (y + h + gutter + 1 > resolution) return false;
    if (slots) (*slots)[f] = {x, y};
    x += w + gap;
    shelf = std::max(shelf, h);
  }
  return true;
}

constexpr double kTinyScale = 1e-300;

}  // namespace

UVAtlas unwrap_per_triangle(const TriangleMesh& mesh, int resolution, int gutter) {
  if (resolution < 64) throw ConfigError("atlas resolution must be >= 64");
  if (gutter < 1) throw ConfigError("atlas gutter must be >= 1");
  mesh.validate();

  std::vector<Chart> charts(mesh.faces.size());
  double widest = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Triangle3 t = mesh.triangle(f);
    require_nondegenerate(t);
    charts[f] = flatten(t);
    widest = std::max({widest, charts[f].width, charts[f].height});
  }
  std::vector<std::uint32_t> order(charts.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return charts[a].height > charts[b].height;
  });

  if (!pack(charts, order, kTinyScale, resolution, gutter, nullptr)) {
    int hi = resolution;
    while (!pack(charts, order, kTinyScale, hi, gutter, nullptr)) hi *= 2;
    int lo = hi / 2;  // does not fit
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (pack(charts, order, kTinyScale, mid, gutter, nullptr) ? hi : lo) = mid;
    }
    throw AtlasOverflow(resolution, hi);
  }

  // Largest scale that fits; lo always fits.
  double lo = kTinyScale;
  double hi = static_cast<double>(resolution) / widest;
  if (pack(charts, order, hi, resolution, gutter, nullptr)) {
    lo = hi;
  } else {
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (pack(charts, order, mid, resolution, gutter, nullptr) ? lo : hi) = mid;
    }
  }

  std::vector<Slot> slots;
  pack(charts, order, lo, resolution, gutter, &slots);

  UVAtlas atlas;
  atlas.resolution = resolution;
  atlas.gutter = gutter;
  atlas.texels_per_unit = lo;
  atlas.placements.resize(charts.size());
  const double inv = 1.0 / resolution;
  for (std::size_t f = 0; f < charts.size(); ++f) {
    std::array<Vec2, 3> uv;
    for (int k = 0; k < 3; ++k)
      uv[k] = Vec2((slots[f].x + charts[f].local[k].x() * lo) * inv,
                   (slots[f].y + charts[f].local[k].y() * lo) * inv);
    atlas.placements[f] = {uv[0], uv[1], uv[2]};
  }
  return atlas;
}

TriangleMesh with_atlas_uvs(const TriangleMesh& mesh, const UVAtlas& atlas) {
  if (atlas.placements.size() != mesh.faces.size())
    throw ConfigError("atlas does not match mesh face count");
  TriangleMesh out = mesh;
  out.uvs.clear();
  out.face_uvs.clear();
  out.uvs.reserve(3 * mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto base = static_cast<std::uint32_t>(out.uvs.size());
    for (int k = 0; k < 3; ++k) out.uvs.push_back(atlas.placements[f][k]);
    out.face_uvs.push_back({base, base + 1, base + 2});
  }
  return out;
}

namespace {

// Separating-axis test between a triangle and the closed square
// [x0, x1] x [y0, y1].
bool triangle_meets_box(const Triangle2& t, double x0, double y0, double x1, double y1) {
  const double tx0 = std::min({t.a.x(), t.b.x(), t.c.x()});
  const double tx1 = std::max({t.a.x(), t.b.x(), t.c.x()});
  const double ty0 = std::min({t.a.y(), t.b.y(), t.c.y()});
  const double ty1 = std::max({t.a.y(), t.b.y(), t.c.y()});
  if (tx1 < x0 || tx0 > x1 || ty1 < y0 || ty0 > y1) return false;
  const std::array<Vec2, 4> corners = {Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
  for (int e = 0; e < 3; ++e) {
    const Vec2& p = t[e];
    const Vec2& q = t[(e + 1) % 3];
    const Vec2& r = t[(e + 2) % 3];
    const Vec2 n(q.y() - p.y(), p.x() - q.x());
    const double side = n.dot(r - p);
    bool all_out = true;
    for (const auto& c : corners)
      if (n.dot(c - p) * side >= 0.0) {
        all_out = false;
        break;
      }
    if (all_out) return false;
  }
  return true;
}

bool center_inside(const Triangle2& t, const Vec2& p) {
  const int o = predicates::orient2d(t.a, t.b, t.c);
  if (o == 0) return false;
  return predicates::orient2d(t.a, t.b, p) * o >= 0 && predicates::orient2d(t.b, t.c, p) * o >= 0 &&
         predicates::orient2d(t.c, t.a, p) * o >= 0;
}

}  // namespace

AtlasReport validate_atlas(const UVAtlas& atlas, const TriangleMesh& mesh) {
  AtlasReport report;
  const int res = atlas.resolution;
  if (atlas.placements.size() != mesh.faces.size())
    report.violations.push_back("atlas has " + std::to_string(atlas.placements.size()) +
                                " placements for " + std::to_string(mesh.faces.size()) + " faces");
  const std::size_t ntex = std::size_t(res) * res;
  std::vector<std::int32_t> owner(ntex, -1);
  std::vector<std::uint8_t> center_hit(ntex, 0);
  std::vector<std::uint8_t> face_overlaps(atlas.placements.size(), 0);
  std::vector<std::int32_t> stamp(ntex, -1);
  const int g = atlas.gutter;

  for (std::size_t f = 0; f < atlas.placements.size(); ++f) {
    const Triangle2& t = atlas.placements[f];
    bool oob = false;
    for (int k = 0; k < 3; ++k)
      if (!(t[k].x() >= 0.0 && t[k].x() <= 1.0 && t[k].y() >= 0.0 && t[k].y() <= 1.0)) oob = true;
    if (oob) {
      report.out_of_bounds_faces.push_back(static_cast<std::uint32_t>(f));
      report.violations.push_back("face " + std::to_string(f) + " placed outside [0,1]^2");
    }
    // texel (i, j) covers [i, i+1] x [j, j+1] in texel units, j measured upward
    const double sx0 = std::min({t.a.x(), t.b.x(), t.c.x()}) * res;
    const double sx1 = std::max({t.a.x(), t.b.x(), t.c.x()}) * res;
    const double sy0 = std::min({t.a.y(), t.b.y(), t.c.y()}) * res;
    const double sy1 = std::max({t.a.y(), t.b.y(), t.c.y()}) * res;
    const int i0 = std::max(0, static_cast<int>(std::floor(sx0)) - 1);
    const int i1 = std::min(res - 1, static_cast<int>(std::floor(sx1)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor(sy0)) - 1);
    const int j1 = std::min(res - 1, static_cast<int>(std::floor(sy1)) + 1);
    const Triangle2 ts{t.a * res, t.b * res, t.c * res};
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        if (!triangle_meets_box(ts, i, j, i + 1, j + 1)) continue;
        if (center_inside(ts, Vec2(i + 0.5, j + 0.5))) center_hit[std::size_t(j) * res + i] = 1;
        for (int dj = -g; dj <= g; ++dj)
          for (int di = -g; di <= g; ++di) {
            const int x = i + di, y = j + dj;
            if (x < 0 || y < 0 || x >= res || y >= res) continue;
            const std::size_t idx = std::size_t(y) * res + x;
            if (stamp[idx] == static_cast<std::int32_t>(f)) continue;
            stamp[idx] = static_cast<std::int32_t>(f);
            if (owner[idx] < 0) {
              owner[idx] = static_cast<std::int32_t>(f);
            } else {
              ++report.overlapping_texels;
              face_overlaps[f] = 1;
              face_overlaps[static_cast<std::size_t>(owner[idx])] = 1;
            }
          }
      }
  }
  for (std::size_t f = 0; f < face_overlaps.size(); ++f)
    if (face_overlaps[f]) report.overlapping_faces.push_back(static_cast<std::uint32_t>(f));
  if (report.overlapping_texels > 0)
    report.violations.push_back(std::to_string(report.overlapping_texels) +
                                " texels claimed by more than one dilated placement");
  report.occupancy =
      static_cast<double>(std::count(center_hit.begin(), center_hit.end(), std::uint8_t{1})) /
      static_cast<double>(ntex);
  return report;
}

}  // namespace pointbake
