#pragma once

#include <filesystem>

#include "pointbake/assets.hpp"

namespace pointbake::io {

/// Reads a PLY point cloud (ascii or binary_little_endian). The `vertex`
/// element must provide x y z, nx ny nz (float32/float64) and red green blue
/// (uint8); other properties and elements are skipped. Normals are
/// renormalized; points with a zero-length normal are dropped and counted.
PointCloud read_pointcloud(const std::filesystem::path& path);

enum class PlyEncoding { Ascii, BinaryLittleEndian };

/// Writes positions and normals as float32 and colors as uint8.
void write_pointcloud(const PointCloud& cloud, const std::filesystem::path& path,
                      PlyEncoding encoding = PlyEncoding::BinaryLittleEndian);

/// Reads a Wavefront OBJ. `v` lines may carry an RGB extension (three extra
/// floats in [0, 1]); faces reference v/vt/vn and must be triangles.
TriangleMesh read_mesh(const std::filesystem::path& path);

/// Writes decimal text with 9 significant digits. Normals are written one per
/// vertex so v and vn share indices.
void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

/// 8-bit RGB PNG without alpha. Coverage is not stored; a decoded grid is
/// marked fully covered.
TexelGrid read_image(const std::filesystem::path& path);
void write_image(const TexelGrid& grid, const std::filesystem::path& path);

}  // namespace pointbake::io
