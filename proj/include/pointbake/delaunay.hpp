#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pointbake/geometry.hpp"

namespace pointbake {

/// Delaunay triangulation of a seed triangle plus sites strictly inside it,
/// built by incremental insertion with Lawson flips on exact orientation and
/// in-circle predicates.
///
/// Site indices: 0, 1, 2 are the seed corners (in the order given), site
/// 3 + i is interior[i]. Output triangles are counter-clockwise.
class PatchDelaunay {
 public:
  struct Tri {
    std::array<std::uint32_t, 3> v;
    std::array<std::int32_t, 3> n;  // n[i]: neighbor across the edge opposite v[i], -1 on the hull
  };

  PatchDelaunay(const Triangle2& seed, std::span<const Vec2> interior);

  std::span<const Vec2> sites() const { return sites_; }
  std::span<const Tri> triangles() const { return tris_; }
  /// Interior sites that coincided exactly with an earlier one and were skipped.
  std::size_t skipped() const { return skipped_; }

 private:
  bool insert(std::uint32_t site);
  std::int32_t locate(const Vec2& p);
  void legalize();
  void replace_neighbor(std::int32_t tri, std::int32_t from, std::int32_t to);

  std::vector<Vec2> sites_;
  std::vector<Tri> tris_;
  std::vector<std::pair<std::int32_t, int>> stack_;
  std::int32_t hint_ = 0;
  std::uint32_t walk_rotation_ = 0;
  std::size_t skipped_ = 0;
};

/// Position along a Hilbert curve of order 16 for (x, y) in [0, 2^16)^2.
std::uint32_t hilbert_index(std::uint32_t x, std::uint32_t y);

}  // namespace pointbake
