#include "pointbake/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pointbake/errors.hpp"

namespace pointbake {

void Camera::validate() const {
  if (!((look_at - position).norm() > 0.0))
    throw ConfigError("camera position coincides with look_at");
  if (!(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0))
    throw ConfigError("camera field of view must be in (0, 180) degrees");
  if (!(near_plane > 0.0 && far_plane > near_plane))
    throw ConfigError("camera needs 0 < near < far");
  if (width <= 0 || height <= 0) throw ConfigError("frame size must be positive");
}

namespace {

struct View {
  Vec3 origin, right, up, forward;
  double fx, fy;  // focal lengths in pixels
  int width, height;
};

View make_view(const Camera& cam) {
  cam.validate();
  View v;
  v.origin = cam.position;
  v.forward = (cam.look_at - cam.position).normalized();
  Vec3 up = cam.up;
  if (v.forward.cross(up).norm() < 1e-9 * std::max(1.0, up.norm()))
    up = std::abs(v.forward.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  v.right = v.forward.cross(up).normalized();
  v.up = v.right.cross(v.forward);
  const double t = std::tan(cam.vertical_fov_deg * std::numbers::pi / 360.0);
  v.fy = 0.5 * cam.height / t;
  v.fx = v.fy;  // square pixels
  v.width = cam.width;
  v.height = cam.height;
  return v;
}

// A clip-space vertex: view-space position and barycentric weights of the
// original face corner mix it came from.
struct ClipVertex {
  Vec3 view;
  Vec3 bary;
};

// A projected triangle ready for rasterization.
struct ScreenTri {
  std::uint32_t face;
  Vec2 s[3];
  double z[3];
  Vec3 bary[3];
  double min_y, max_y;
};

void project_mesh(const TriangleMesh& mesh, const View& v, double near_plane,
                  std::vector<ScreenTri>& out) {
  for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
    ClipVertex in[3];
    for (int k = 0; k < 3; ++k) {
      const Vec3 d = mesh.vertices[mesh.faces[f][k]] - v.origin;
      in[k].view = Vec3(d.dot(v.right), d.dot(v.up), d.dot(v.forward));
      in[k].bary = Vec3::Unit(k);
    }
    // Clip against z >= near.
    ClipVertex poly[4];
    int n = 0;
    for (int k = 0; k < 3; ++k) {
      const ClipVertex& a = in[k];
      const ClipVertex& b = in[(k + 1) % 3];
      const bool ia = a.view.z() >= near_plane, ib = b.view.z() >= near_plane;
      if (ia) poly[n++] = a;
      if (ia != ib) {
        const double t = (near_plane - a.view.z()) / (b.view.z() - a.view.z());
        poly[n++] = {a.view + t * (b.view - a.view), a.bary + t * (b.bary - a.bary)};
      }
    }
    for (int k = 1; k + 1 < n; ++k) {
      ScreenTri st;
      st.face = f;
      const ClipVertex* tri[3] = {&poly[0], &poly[k], &poly[k + 1]};
      for (int j = 0; j < 3; ++j) {
        const Vec3& p = tri[j]->view;
        st.s[j] = Vec2(0.5 * v.width + v.fx * p.x() / p.z(), 0.5 * v.height - v.fy * p.y() / p.z());
        st.z[j] = p.z();
        st.bary[j] = tri[j]->bary;
      }
      st.min_y = std::min({st.s[0].y(), st.s[1].y(), st.s[2].y()});
      st.max_y = std::max({st.s[0].y(), st.s[1].y(), st.s[2].y()});
      out.push_back(st);
    }
  }
}

double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

struct GBuffer {
  std::vector<std::int32_t> face;
  std::vector<Vec3> bary;
  std::vector<double> depth;
};

GBuffer rasterize(const TriangleMesh& mesh, const Camera& cam) {
  const View v = make_view(cam);
  std::vector<ScreenTri> tris;
  tris.reserve(mesh.faces.size());
  project_mesh(mesh, v, cam.near_plane, tris);

  const int W = cam.width, H = cam.height;
  GBuffer g;
  g.face.assign(std::size_t(W) * H, -1);
  g.bary.assign(std::size_t(W) * H, Vec3::Zero());
  g.depth.assign(std::size_t(W) * H, std::numeric_limits<double>::infinity());

  // Horizontal bands rasterize independently; within a band triangles are
  // visited in face order, and a fragment must be strictly nearer to win.
  constexpr int kBand = 16;
  const int bands = (H + kBand - 1) / kBand;
#pragma omp parallel for schedule(dynamic, 1)
  for (int band = 0; band < bands; ++band) {
    const int r0 = band * kBand, r1 = std::min(H, r0 + kBand) - 1;
    for (const ScreenTri& t : tris) {
      if (t.max_y < r0 + 0.5 - 1 || t.min_y > r1 + 0.5 + 1) continue;
      const double area = edge(t.s[0], t.s[1], t.s[2]);
      if (area == 0.0 || !std::isfinite(area)) continue;
      const int y0 = std::max(r0, static_cast<int>(std::floor(t.min_y - 0.5)));
      const int y1 = std::min(r1, static_cast<int>(std::ceil(t.max_y - 0.5)));
      const double minx = std::min({t.s[0].x(), t.s[1].x(), t.s[2].x()});
      const double maxx = std::max({t.s[0].x(), t.s[1].x(), t.s[2].x()});
      const int x0 = std::max(0, static_cast<int>(std::floor(minx - 0.5)));
      const int x1 = std::min(W - 1, static_cast<int>(std::ceil(maxx - 0.5)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const Vec2 p(x + 0.5, y + 0.5);
          const double l0 = edge(t.s[1], t.s[2], p) / area;
          const double l1 = edge(t.s[2], t.s[0], p) / area;
          const double l2 = edge(t.s[0], t.s[1], p) / area;
          if (l0 < 0 || l1 < 0 || l2 < 0) continue;
          const double inv_z = l0 / t.z[0] + l1 / t.z[1] + l2 / t.z[2];
          const double depth = 1.0 / inv_z;
          const std::size_t i = std::size_t(y) * W + x;
          if (!(depth < g.depth[i]) || depth > cam.far_plane) continue;
          g.depth[i] = depth;
          g.face[i] = static_cast<std::int32_t>(t.face);
          const Vec3 b = (l0 / t.z[0]) * t.bary[0] + (l1 / t.z[1]) * t.bary[1] +
                         (l2 / t.z[2]) * t.bary[2];
          g.bary[i] = b / inv_z;
        }
    }
  }
  return g;
}

Vec3 unit_light(const Vec3& d) {
  if (!(d.norm() > 0.0)) throw ConfigError("light direction must be nonzero");
  return d.normalized();
}

double lambert(const Vec3& n, const Vec3& light) {
  return 0.2 + 0.8 * std::max(0.0, n.dot(-light));
}

template <class ShadeFn>
RenderedFrame shade(const GBuffer& g, const Camera& cam, ShadeFn&& fn) {
  RenderedFrame frame{TexelGrid(cam.width, cam.height), g.depth};
  const int W = cam.width;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < cam.height; ++row)
    for (int x = 0; x < W; ++x) {
      const std::size_t i = std::size_t(row) * W + x;
      if (g.face[i] < 0) continue;
      frame.color.set(x, row, quantize(fn(static_cast<std::uint32_t>(g.face[i]), g.bary[i])));
      frame.color.set_covered(x, row, true);
    }
  return frame;
}

UnitVec3 vertex_normal(const TriangleMesh& mesh, std::uint32_t f, const Vec3& b) {
  const UnitVec3 face_n = triangle_normal(mesh.triangle(f));
  if (!mesh.has_normals()) return face_n;
  const Face& fv = mesh.faces[f];
  const Vec3 n = b[0] * mesh.normals[fv[0]] + b[1] * mesh.normals[fv[1]] + b[2] * mesh.normals[fv[2]];
  return n.norm() > 1e-12 ? UnitVec3(n.normalized()) : face_n;
}

}  // namespace

RenderedFrame render(const TriangleMesh& mesh, const TexelGrid& texture,
                     const TexelGrid& normal_map, const Camera& camera, const UnitVec3& light_dir) {
  if (!mesh.has_uvs())
    throw MissingUVs("mesh has no texture coordinates; run `unwrap` first to generate an atlas");
  if (texture.width() == 0) throw DimensionError("texture is empty");
  const bool mapped_normals = normal_map.width() > 0;
  const Vec3 light = unit_light(light_dir);
  const GBuffer g = rasterize(mesh, camera);
  return shade(g, camera, [&](std::uint32_t f, const Vec3& b) {
    const Triangle2 uvt = mesh.uv_triangle(f);
    const Vec2 uv = b[0] * uvt.a + b[1] * uvt.b + b[2] * uvt.c;
    const ColorF albedo = to_colorf(texture.get(texture.column_of(uv.x()), texture.row_of(uv.y())));
    Vec3 n;
    if (mapped_normals) {
      n = decode_normal(normal_map.get(normal_map.column_of(uv.x()), normal_map.row_of(uv.y())));
      n = n.norm() > 1e-12 ? Vec3(n.normalized()) : vertex_normal(mesh, f, b);
    } else {
      n = vertex_normal(mesh, f, b);
    }
    return ColorF(albedo * lambert(n, light));
  });
}

RenderedFrame render_vertex_colors(const TriangleMesh& mesh, const Camera& camera,
                                   const UnitVec3& light_dir) {
  if (!mesh.has_colors()) throw ConfigError("mesh has no vertex colors to render");
  const Vec3 light = unit_light(light_dir);
  const GBuffer g = rasterize(mesh, camera);
  return shade(g, camera, [&](std::uint32_t f, const Vec3& b) {
    const Face& fv = mesh.faces[f];
    const ColorF albedo = b[0] * to_colorf(mesh.colors[fv[0]]) +
                          b[1] * to_colorf(mesh.colors[fv[1]]) +
                          b[2] * to_colorf(mesh.colors[fv[2]]);
    return ColorF(albedo * lambert(vertex_normal(mesh, f, b), light));
  });
}

}  // namespace pointbake
