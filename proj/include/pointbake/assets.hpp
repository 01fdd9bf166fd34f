#pragma once

// In-memory representations of the pipeline's inputs and outputs: colored
// point clouds, indexed triangle meshes and 8-bit RGB texel grids.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "pointbake/geometry.hpp"

namespace pointbake {

using Rgb8 = std::array<std::uint8_t, 3>;
using Face = std::array<std::uint32_t, 3>;

/// Colors are carried in double precision between stages and quantized only
/// when written into a TexelGrid.
using ColorF = Vector3<double>;

inline ColorF to_colorf(const Rgb8& c) { return ColorF(c[0], c[1], c[2]); }
Rgb8 quantize(const ColorF& c);

/// Nearest float32 value, widened back to double.
double to_float32(double v);

struct SurfacePoint {
  Vec3 position;
  UnitVec3 normal;
  Rgb8 color;
};

struct PointCloud {
  std::vector<SurfacePoint> points;
  Eigen::AlignedBox3d bounds;
  /// Points skipped on load because their normal had zero length.
  std::size_t dropped_zero_normals = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const SurfacePoint& operator[](std::size_t i) const { return points[i]; }
  void recompute_bounds();
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  /// Optional per-vertex attributes; empty when absent.
  std::vector<UnitVec3> normals;
  std::vector<Rgb8> colors;
  /// Optional per-face-corner texture coordinates: face_uvs[f][k] indexes uvs.
  std::vector<Vec2> uvs;
  std::vector<Face> face_uvs;

  bool has_uvs() const { return !face_uvs.empty(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_colors() const { return !colors.empty(); }

  Triangle3 triangle(std::size_t f) const {
    const Face& i = faces[f];
    return {vertices[i[0]], vertices[i[1]], vertices[i[2]]};
  }
  Triangle2 uv_triangle(std::size_t f) const {
    const Face& i = face_uvs[f];
    return {uvs[i[0]], uvs[i[1]], uvs[i[2]]};
  }

  /// Throws IndexError / ConfigError when the structural invariants fail.
  void validate() const;
};

/// W x H RGB image with a per-texel coverage flag. Row 0 is the top image row;
/// texture coordinate (0, 0) is the bottom-left corner (V points up).
class TexelGrid {
 public:
  TexelGrid() = default;
  TexelGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t texel_count() const { return std::size_t(width_) * std::size_t(height_); }

  std::size_t index(int x, int row) const { return std::size_t(row) * width_ + x; }
  Rgb8 get(int x, int row) const;
  void set(int x, int row, const Rgb8& c);
  bool covered(int x, int row) const { return coverage_[index(x, row)] != 0; }
  void set_covered(int x, int row, bool v) { coverage_[index(x, row)] = v ? 1 : 0; }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> coverage() { return coverage_; }
  std::span<const std::uint8_t> coverage() const { return coverage_; }
  std::size_t covered_count() const;

  /// Texture coordinate of the center of texel (x, row).
  Vec2 texel_center_uv(int x, int row) const {
    return {(x + 0.5) / width_, (height_ - row - 0.5) / height_};
  }
  /// Texel column / row containing a texture coordinate, clamped to the grid.
  int column_of(double u) const;
  int row_of(double v) const;

  bool operator==(const TexelGrid& o) const {
    return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
  std::vector<std::uint8_t> coverage_;
};

/// Object-space normal <-> 8-bit encoding, channel = round((n + 1) / 2 * 255).
Rgb8 encode_normal(const UnitVec3& n);
Vec3 decode_normal(const Rgb8& c);

}  // namespace pointbake
