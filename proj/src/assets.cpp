#include "pointbake/assets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pointbake/errors.hpp"

namespace pointbake {

// Out of line on purpose: GCC 11 at -O3 vectorizes the narrowing and widening
// of two neighboring coordinates into a plain copy, silently skipping the rounding.
[[gnu::noinline]] double to_float32(double v) { return static_cast<double>(static_cast<float>(v)); }

Rgb8 quantize(const ColorF& c) {
  Rgb8 out;
  for (int k = 0; k < 3; ++k)
    out[k] = static_cast<std::uint8_t>(std::clamp(std::lround(c[k]), 0L, 255L));
  return out;
}

void PointCloud::recompute_bounds() {
  bounds.setEmpty();
  for (const auto& p : points) bounds.extend(p.position);
}

void TriangleMesh::validate() const {
  if (faces.empty()) throw ConfigError("mesh has no faces");
  const auto nv = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& i = faces[f];
    for (auto idx : i)
      if (idx >= nv)
        throw IndexError("face " + std::to_string(f) + " references vertex " +
                         std::to_string(idx) + " of " + std::to_string(nv));
    if (i[0] == i[1] || i[1] == i[2] || i[0] == i[2])
      throw IndexError("face " + std::to_string(f) + " repeats a vertex index");
  }
  if (!normals.empty() && normals.size() != nv)
    throw IndexError("normal count does not match vertex count");
  if (!colors.empty() && colors.size() != nv)
    throw IndexError("color count does not match vertex count");
  if (!face_uvs.empty()) {
    if (face_uvs.size() != faces.size()) throw IndexError("uv face count does not match faces");
    for (const auto& fu : face_uvs)
      for (auto idx : fu)
        if (idx >= uvs.size()) throw IndexError("uv index out of range");
  }
}

TexelGrid::TexelGrid(int width, int height)
    : width_(width),
      height_(height),
      data_(std::size_t(width) * std::size_t(height) * 3, 0),
      coverage_(std::size_t(width) * std::size_t(height), 0) {
  if (width <= 0 || height <= 0) throw ConfigError("texel grid dimensions must be positive");
}

Rgb8 TexelGrid::get(int x, int row) const {
  const std::size_t i = index(x, row) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void TexelGrid::set(int x, int row, const Rgb8& c) {
  const std::size_t i = index(x, row) * 3;
  data_[i] = c[0];
  data_[i + 1] = c[1];
  data_[i + 2] = c[2];
}

std::size_t TexelGrid::covered_count() const {
  return std::size_t(std::count(coverage_.begin(), coverage_.end(), std::uint8_t{1}));
}

int TexelGrid::column_of(double u) const {
  return std::clamp(static_cast<int>(std::floor(u * width_)), 0, width_ - 1);
}

int TexelGrid::row_of(double v) const {
  const int y = std::clamp(static_cast<int>(std::floor(v * height_)), 0, height_ - 1);
  return height_ - 1 - y;
}

Rgb8 encode_normal(const UnitVec3& n) {
  Rgb8 out;
  for (int k = 0; k < 3; ++k)
    out[k] = static_cast<std::uint8_t>(
        std::clamp(std::lround((std::clamp(n[k], -1.0, 1.0) + 1.0) * 0.5 * 255.0), 0L, 255L));
  return out;
}

Vec3 decode_normal(const Rgb8& c) {
  return Vec3(c[0] / 255.0 * 2.0 - 1.0, c[1] / 255.0 * 2.0 - 1.0, c[2] / 255.0 * 2.0 - 1.0);
}

}  // namespace pointbake
