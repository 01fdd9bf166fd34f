#include "pointbake/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "pointbake/errors.hpp"

namespace pointbake {

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "checker-plane") return SceneKind::CheckerPlane;
  if (name == "stripe-sphere") return SceneKind::StripeSphere;
  if (name == "step-wall") return SceneKind::StepWall;
  throw ConfigError("unknown scene kind '" + std::string(name) +
                    "' (expected checker-plane, stripe-sphere or step-wall)");
}

std::string_view scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::CheckerPlane: return "checker-plane";
    case SceneKind::StripeSphere: return "stripe-sphere";
    case SceneKind::StepWall: return "step-wall";
  }
  return "unknown";
}

SceneRng::SceneRng(std::uint64_t seed) : engine_(seed) {}

double SceneRng::uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

double SceneRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do u1 = uniform();
  while (u1 == 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

namespace {

const ColorF kWhite(255, 255, 255), kBlack(0, 0, 0);
const ColorF kStripeA(214, 72, 38), kStripeB(246, 226, 180);
const ColorF kBrick(170, 74, 52), kMortar(200, 196, 186);
constexpr int kStripes = 12;

ColorF checker_color(double x, double y) {
  const auto cx = static_cast<long long>(std::floor(x / kCheckerPeriod));
  const auto cy = static_cast<long long>(std::floor(y / kCheckerPeriod));
  return ((cx + cy) % 2 == 0) ? kWhite : kBlack;
}

ColorF stripe_color(const Vec3& unit) {
  const double lat = std::asin(std::clamp(unit.z(), -1.0, 1.0)) + 0.5 * std::numbers::pi;
  const int band = std::min(kStripes - 1, static_cast<int>(lat / (std::numbers::pi / kStripes)));
  return band % 2 == 0 ? kStripeA : kStripeB;
}

// Brick courses over the unfolded wall coordinates (s along the profile,
// t across it).
ColorF brick_color(double s, double t) {
  constexpr double kLength = 0.25, kCourse = 0.125, kJoint = 0.02;
  const auto course = static_cast<long long>(std::floor(t / kCourse));
  const double shifted = s + (course % 2 != 0 ? 0.5 * kLength : 0.0);
  const double along = shifted - kLength * std::floor(shifted / kLength);
  const double across = t - kCourse * std::floor(t / kCourse);
  return (along < kJoint || across < kJoint) ? kMortar : kBrick;
}

// The step wall: lower tread, riser, upper tread.
struct WallPanel {
  Vec3 origin, s_axis, t_axis;
  double length;    // along s_axis; every panel is 1 unit wide along t_axis
  double s_offset;  // unfolded coordinate of origin
  UnitVec3 normal;
};
const std::array<WallPanel, 3>& wall_panels() {
  static const std::array<WallPanel, 3> panels = {{
      {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 1.0, 0.0, Vec3(0, 0, 1)},
      {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(0, 1, 0), 0.5, 1.0, Vec3(-1, 0, 0)},
      {Vec3(1, 0, 0.5), Vec3(1, 0, 0), Vec3(0, 1, 0), 1.0, 1.5, Vec3(0, 0, 1)},
  }};
  return panels;
}
constexpr double kWallArea = 2.5;

SurfaceSample wall_sample(const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  SurfaceSample out{};
  for (const auto& w : wall_panels()) {
    const Vec3 d = p - w.origin;
    const double s = std::clamp(d.dot(w.s_axis), 0.0, w.length);
    const double t = std::clamp(d.dot(w.t_axis), 0.0, 1.0);
    const double dist = (w.origin + s * w.s_axis + t * w.t_axis - p).norm();
    if (dist < best) {
      best = dist;
      out = {brick_color(w.s_offset + s, t), w.normal};
    }
  }
  return out;
}

Vec3 round_to_float(const Vec3& p) {
  return Vec3(to_float32(p.x()), to_float32(p.y()), to_float32(p.z()));
}

// Quad grid over a parametric rectangle with its own vertices.
void append_grid(TriangleMesh& m, const Vec3& origin, const Vec3& s_axis, const Vec3& t_axis,
                 int ns, int nt, const UnitVec3& normal,
                 const std::function<ColorF(const Vec3&)>& color) {
  const auto base = static_cast<std::uint32_t>(m.vertices.size());
  for (int j = 0; j <= nt; ++j)
    for (int i = 0; i <= ns; ++i) {
      const Vec3 p = round_to_float(origin + (double(i) / ns) * s_axis + (double(j) / nt) * t_axis);
      m.vertices.push_back(p);
      m.normals.push_back(normal);
      m.colors.push_back(quantize(color(p)));
    }
  auto at = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (ns + 1) + i); };
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < ns; ++i) {
      m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
}

}  // namespace

SurfaceSample analytic_surface(SceneKind kind, const Vec3& p) {
  switch (kind) {
    case SceneKind::CheckerPlane:
      return {checker_color(p.x(), p.y()), UnitVec3(0, 0, 1)};
    case SceneKind::StripeSphere: {
      const double r = p.norm();
      const UnitVec3 n = r > 0.0 ? UnitVec3(p / r) : UnitVec3(0, 0, 1);
      return {stripe_color(n), n};
    }
    case SceneKind::StepWall:
      return wall_sample(p);
  }
  return {};
}

double checker_edge_distance(const Vec3& p) {
  auto axis = [](double v) {
    const double r = v - kCheckerPeriod * std::floor(v / kCheckerPeriod);
    return std::min(r, kCheckerPeriod - r);
  };
  return std::min(axis(p.x()), axis(p.y()));
}

TriangleMesh icosphere(int level) {
  if (level < 0) throw ConfigError("icosphere level must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  for (const Vec3& v : {Vec3(-1, t, 0), Vec3(1, t, 0), Vec3(-1, -t, 0), Vec3(1, -t, 0),
                        Vec3(0, -1, t), Vec3(0, 1, t), Vec3(0, -1, -t), Vec3(0, 1, -t),
                        Vec3(t, 0, -1), Vec3(t, 0, 1), Vec3(-t, 0, -1), Vec3(-t, 0, 1)})
    m.vertices.push_back(v.normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto [it, fresh] = midpoints.try_emplace({key.first, key.second}, 0u);
      if (fresh) {
        it->second = static_cast<std::uint32_t>(m.vertices.size());
        m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      }
      return it->second;
    };
    std::vector<Face> next;
    next.reserve(4 * m.faces.size());
    for (const Face& f : m.faces) {
      const auto ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  for (auto& v : m.vertices) v = round_to_float(v);
  return m;
}

SyntheticScene synth_scene(SceneKind kind, std::size_t point_count, double noise_sigma,
                           std::uint64_t seed) {
  if (point_count < 1000) throw ConfigError("synthetic scenes need at least 1000 points");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ConfigError("noise sigma must be a finite value >= 0");

  SyntheticScene scene;
  scene.kind = kind;
  SceneRng rng(seed);
  auto& pts = scene.cloud.points;
  pts.reserve(point_count);

  auto emit = [&](const Vec3& on_surface) {
    const Vec3 p = round_to_float(on_surface);
    const SurfaceSample s = analytic_surface(kind, p);
    Vec3 q = p;
    if (noise_sigma > 0.0) {
      const double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
      q = round_to_float(p + noise_sigma * Vec3(nx, ny, nz));
    }
    pts.push_back({q, s.normal, quantize(s.color)});
  };

  double area = 1.0;
  switch (kind) {
    case SceneKind::CheckerPlane: {
      for (std::size_t i = 0; i < point_count; ++i) {
        const double x = rng.uniform(), y = rng.uniform();
        emit(Vec3(x, y, 0.0));
      }
      scene.low.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
      scene.low.faces = {{0, 1, 2}, {0, 2, 3}};
      append_grid(scene.high, Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 128, 128,
                  UnitVec3(0, 0, 1),
                  [](const Vec3& p) { return checker_color(p.x(), p.y()); });
      scene.cfg.d_max = 0.005;
      scene.cfg.resolution = 512;
      Camera top;
      top.position = Vec3(0.5, 0.5, 1.6);
      top.look_at = Vec3(0.5, 0.5, 0.0);
      top.vertical_fov_deg = 40.0;
      Camera oblique = top;
      oblique.position = Vec3(0.5, -0.5, 1.2);
      oblique.up = UnitVec3(0, 0, 1);
      scene.cameras = {top, oblique};
      scene.light_dir = Vec3(0.3, 0.2, -1.0).normalized();
      break;
    }
    case SceneKind::StripeSphere: {
      area = 4.0 * std::numbers::pi;
      for (std::size_t i = 0; i < point_count; ++i) {
        Vec3 d;
        do d = Vec3(rng.normal(), rng.normal(), rng.normal());
        while (d.norm() < 1e-12);
        emit(d.normalized());
      }
      scene.low = icosphere(2);
      scene.high = icosphere(7);
      scene.high.normals.reserve(scene.high.vertices.size());
      scene.high.colors.reserve(scene.high.vertices.size());
      for (const auto& v : scene.high.vertices) {
        const SurfaceSample s = analytic_surface(kind, v);
        scene.high.normals.push_back(s.normal);
        scene.high.colors.push_back(quantize(s.color));
      }
      scene.cfg.d_max = 0.05;
      scene.cfg.resolution = 1024;
      for (const Vec3& pos : {Vec3(3.5, 0.0, 0.9), Vec3(-1.75, 3.03, -0.6), Vec3(-1.75, -3.03, 1.8)}) {
        Camera c;
        c.position = pos;
        c.look_at = Vec3::Zero();
        c.up = UnitVec3(0, 0, 1);
        c.vertical_fov_deg = 40.0;
        scene.cameras.push_back(c);
      }
      scene.light_dir = Vec3(-1.0, -0.6, -0.8).normalized();
      break;
    }
    case SceneKind::StepWall: {
      area = kWallArea;
      const auto& panels = wall_panels();
      for (std::size_t i = 0; i < point_count; ++i) {
        double a = rng.uniform() * kWallArea;
        const double t = rng.uniform();
        std::size_t k = 0;
        while (k + 1 < panels.size() && a >= panels[k].length) a -= panels[k++].length;
        const WallPanel& w = panels[k];
        emit(w.origin + std::min(a, w.length) * w.s_axis + t * w.t_axis);
      }
      // Each panel split into two quads across its width; fold vertices shared.
      std::map<std::array<double, 3>, std::uint32_t> ids;
      auto vertex = [&](const Vec3& p) {
        auto [it, fresh] = ids.try_emplace({p.x(), p.y(), p.z()},
                                           static_cast<std::uint32_t>(scene.low.vertices.size()));
        if (fresh) scene.low.vertices.push_back(p);
        return it->second;
      };
      for (const auto& w : panels)
        for (int q = 0; q < 2; ++q) {
          const Vec3 p00 = w.origin + 0.5 * q * w.t_axis;
          const Vec3 p10 = p00 + w.length * w.s_axis;
          const Vec3 p01 = p00 + 0.5 * w.t_axis;
          const Vec3 p11 = p10 + 0.5 * w.t_axis;
          const auto a = vertex(p00), b = vertex(p10), c = vertex(p11), d = vertex(p01);
          scene.low.faces.push_back({a, b, c});
          scene.low.faces.push_back({a, c, d});
        }
      for (const auto& w : panels)
        append_grid(scene.high, w.origin, w.length * w.s_axis, w.t_axis,
                    static_cast<int>(std::lround(40 * w.length)), 40, w.normal,
                    [](const Vec3& p) { return wall_sample(p).color; });
      scene.cfg.d_max = 0.01;
      scene.cfg.resolution = 512;
      Camera front;
      front.position = Vec3(1.0, -1.8, 2.2);
      front.look_at = Vec3(1.0, 0.5, 0.25);
      front.up = UnitVec3(0, 0, 1);
      front.vertical_fov_deg = 45.0;
      Camera side = front;
      side.position = Vec3(-1.0, -0.6, 1.4);
      scene.cameras = {front, side};
      scene.light_dir = Vec3(0.6, 0.3, -1.0).normalized();
      break;
    }
  }
  scene.cfg.d_max += 5.0 * noise_sigma;
  scene.mean_spacing = std::sqrt(area / double(point_count));
  scene.cloud.recompute_bounds();
  return scene;
}

}  // namespace pointbake
