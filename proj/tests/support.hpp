#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "pointbake/assets.hpp"

namespace pointbake::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Vec3 vec3(double lo, double hi) { return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)); }
  Vec2 vec2(double lo, double hi) { return Vec2(uniform(lo, hi), uniform(lo, hi)); }
  UnitVec3 unit() {
    Vec3 v;
    do v = vec3(-1, 1);
    while (v.norm() < 1e-3 || v.norm() > 1.0);
    return v.normalized();
  }
  Triangle3 triangle(double lo, double hi) {
    for (;;) {
      Triangle3 t{vec3(lo, hi), vec3(lo, hi), vec3(lo, hi)};
      if (t.area() > 1e-3 * (hi - lo) * (hi - lo)) return t;
    }
  }
  Triangle2 triangle2(double lo, double hi) {
    for (;;) {
      Triangle2 t{vec2(lo, hi), vec2(lo, hi), vec2(lo, hi)};
      if (std::abs(t.signed_area()) > 1e-2 * (hi - lo) * (hi - lo)) return t;
    }
  }
  Rgb8 color() {
    return {static_cast<std::uint8_t>(integer(0, 255)), static_cast<std::uint8_t>(integer(0, 255)),
            static_cast<std::uint8_t>(integer(0, 255))};
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pointbake_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Cloud of random points with random normals and colors in [lo, hi]^3.
inline PointCloud random_cloud(Rng& rng, std::size_t n, double lo, double hi) {
  PointCloud c;
  c.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({rng.vec3(lo, hi), rng.unit(), rng.color()});
  c.recompute_bounds();
  return c;
}

}  // namespace pointbake::testing
