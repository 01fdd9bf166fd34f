#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pointbake/assets.hpp"

namespace pointbake {

/// Uniform grid over a point cloud. Cells are stored densely in CSR form:
/// the points of cell c are indices_[cell_start_[c] .. cell_start_[c + 1]).
/// Immutable after construction; queries are safe from any thread.
class UniformGrid {
 public:
  /// Upper bound on the number of cells, as a multiple of the point count.
  /// When the requested cell size would exceed it the cells are enlarged.
  static constexpr std::size_t kMaxCellsPerPoint = 8;
  static constexpr std::size_t kMinCellBudget = 4096;

  UniformGrid(const PointCloud& cloud, double cell_size);

  double cell_size() const { return cell_size_; }
  double requested_cell_size() const { return requested_cell_size_; }
  const Vec3& origin() const { return origin_; }
  const Eigen::Array3i& dims() const { return dims_; }
  std::size_t cell_count() const { return cell_start_.size() - 1; }
  std::size_t point_count() const { return indices_.size(); }

  Eigen::Array3i cell_of(const Vec3& p) const;
  std::size_t linear_index(const Eigen::Array3i& c) const {
    return (std::size_t(c.z()) * dims_.y() + c.y()) * dims_.x() + c.x();
  }
  std::span<const std::uint32_t> cell(std::size_t linear) const {
    return {indices_.data() + cell_start_[linear], indices_.data() + cell_start_[linear + 1]};
  }
  std::size_t occupied_cells() const;

  /// Every point within `radius` of the box [lo, hi] is returned (plus,
  /// possibly, farther ones), in cell order.
  std::vector<std::uint32_t> candidates_in_box(const Vec3& lo, const Vec3& hi,
                                               double radius) const;

  /// The k nearest points to q, ordered by (distance, index). Exact.
  std::vector<std::pair<double, std::uint32_t>> k_nearest(const PointCloud& cloud, const Vec3& q,
                                                          std::size_t k) const;

 private:
  double requested_cell_size_;
  double cell_size_;
  Vec3 origin_;
  Eigen::Array3i dims_;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> indices_;
};

UniformGrid build_grid(const PointCloud& cloud, double cell_size);

/// Superset of the points whose distance to t is at most d_max.
std::vector<std::uint32_t> candidates_near_triangle(const UniformGrid& grid, const Triangle3& t,
                                                    double d_max);

/// Grid over the faces of a mesh for closest-point-on-surface queries.
class TriangleGrid {
 public:
  explicit TriangleGrid(const TriangleMesh& mesh);

  struct Hit {
    std::uint32_t face = 0;
    double distance = 0.0;
    ClosestPoint closest;
  };

  /// Closest point on the mesh surface to q. Ties go to the lowest face index.
  Hit closest_point(const Vec3& q) const;

 private:
  const TriangleMesh* mesh_;
  double cell_size_ = 1.0;
  Vec3 origin_;
  Eigen::Array3i dims_;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> faces_;
};

}  // namespace pointbake
