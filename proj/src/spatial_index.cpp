#include "pointbake/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pointbake/errors.hpp"

namespace pointbake {
namespace {

// Dimensions of a grid of cubic cells of size cs covering [lo, hi]; the cell
// size grows until the total cell count fits the budget.
Eigen::Array3i fit_dims(const Vec3& lo, const Vec3& hi, double& cs, std::size_t budget) {
  const Vec3 extent = hi - lo;
  for (;;) {
    Eigen::Array3d d;
    for (int k = 0; k < 3; ++k) d[k] = std::max(1.0, std::floor(extent[k] / cs) + 1.0);
    const double total = d.prod();
    if (total <= static_cast<double>(budget)) return d.cast<int>();
    cs *= std::cbrt(total / static_cast<double>(budget)) * 1.01;
  }
}

Eigen::Array3i clamp_cell(const Eigen::Array3d& f, const Eigen::Array3i& dims) {
  Eigen::Array3i c;
  for (int k = 0; k < 3; ++k) {
    const double v = std::floor(f[k]);
    c[k] = v < 0 ? 0 : (v >= dims[k] ? dims[k] - 1 : static_cast<int>(v));
  }
  return c;
}

// Distance from q to the region outside the cell block [c - r, c + r]; sides
// of the block that already reach the grid boundary contribute nothing.
double unexplored_bound(const Vec3& q, const Vec3& origin, double cs, const Eigen::Array3i& c,
                        int r, const Eigen::Array3i& dims, bool& exhausted) {
  double bound = std::numeric_limits<double>::infinity();
  exhausted = true;
  for (int k = 0; k < 3; ++k) {
    if (c[k] - r > 0) {
      exhausted = false;
      bound = std::min(bound, q[k] - (origin[k] + (c[k] - r) * cs));
    }
    if (c[k] + r < dims[k] - 1) {
      exhausted = false;
      bound = std::min(bound, origin[k] + (c[k] + r + 1) * cs - q[k]);
    }
  }
  return bound;
}

// Visits every cell at Chebyshev distance exactly r from c inside the grid.
template <typename Fn>
void for_each_ring_cell(const Eigen::Array3i& c, int r, const Eigen::Array3i& dims, Fn&& fn) {
  const int z0 = std::max(0, c.z() - r), z1 = std::min(dims.z() - 1, c.z() + r);
  const int y0 = std::max(0, c.y() - r), y1 = std::min(dims.y() - 1, c.y() + r);
  const int x0 = std::max(0, c.x() - r), x1 = std::min(dims.x() - 1, c.x() + r);
  for (int z = z0; z <= z1; ++z)
    for (int y = y0; y <= y1; ++y) {
      const bool yz_shell = std::abs(z - c.z()) == r || std::abs(y - c.y()) == r;
      if (yz_shell) {
        for (int x = x0; x <= x1; ++x) fn(Eigen::Array3i(x, y, z));
      } else {
        if (c.x() - r >= 0) fn(Eigen::Array3i(c.x() - r, y, z));
        if (r > 0 && c.x() + r < dims.x()) fn(Eigen::Array3i(c.x() + r, y, z));
      }
    }
}

}  // namespace

UniformGrid::UniformGrid(const PointCloud& cloud, double cell_size)
    : requested_cell_size_(cell_size), cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw ConfigError("grid cell size must be positive, got " + std::to_string(cell_size));
  if (cloud.empty()) throw ConfigError("cannot build a grid over an empty point cloud");

  Eigen::AlignedBox3d box;
  for (const auto& p : cloud.points) box.extend(p.position);
  origin_ = box.min();
  const std::size_t budget =
      std::max(kMinCellBudget, kMaxCellsPerPoint * cloud.size());
  dims_ = fit_dims(box.min(), box.max(), cell_size_, budget);

  const std::size_t ncells = std::size_t(dims_.x()) * dims_.y() * dims_.z();
  std::vector<std::uint32_t> cell_id(cloud.size());
  cell_start_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cell_id[i] = static_cast<std::uint32_t>(linear_index(cell_of(cloud[i].position)));
    ++cell_start_[cell_id[i] + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) cell_start_[c + 1] += cell_start_[c];
  indices_.resize(cloud.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    indices_[fill[cell_id[i]]++] = static_cast<std::uint32_t>(i);
}

Eigen::Array3i UniformGrid::cell_of(const Vec3& p) const {
  return clamp_cell(((p - origin_) / cell_size_).array(), dims_);
}

std::size_t UniformGrid::occupied_cells() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c + 1 < cell_start_.size(); ++c)
    if (cell_start_[c + 1] > cell_start_[c]) ++n;
  return n;
}

std::vector<std::uint32_t> UniformGrid::candidates_in_box(const Vec3& lo, const Vec3& hi,
                                                          double radius) const {
  const Vec3 r = Vec3::Constant(radius);
  const Eigen::Array3d flo = ((lo - r - origin_) / cell_size_).array();
  const Eigen::Array3d fhi = ((hi + r - origin_) / cell_size_).array();
  std::vector<std::uint32_t> out;
  // Boxes beyond the grid clamp to border cells; the result stays a superset.
  const Eigen::Array3i c0 = clamp_cell(flo, dims_);
  const Eigen::Array3i c1 = clamp_cell(fhi, dims_);
  for (int z = c0.z(); z <= c1.z(); ++z)
    for (int y = c0.y(); y <= c1.y(); ++y) {
      const std::size_t row = linear_index(Eigen::Array3i(0, y, z));
      const auto b = cell_start_[row + c0.x()], e = cell_start_[row + c1.x() + 1];
      out.insert(out.end(), indices_.begin() + b, indices_.begin() + e);
    }
  return out;
}

std::vector<std::pair<double, std::uint32_t>> UniformGrid::k_nearest(const PointCloud& cloud,
                                                                     const Vec3& q,
                                                                     std::size_t k) const {
  std::vector<std::pair<double, std::uint32_t>> best;
  if (k == 0) return best;
  k = std::min(k, indices_.size());
  auto consider = [&](std::uint32_t idx) {
    const std::pair<double, std::uint32_t> cand{(cloud[idx].position - q).norm(), idx};
    if (best.size() == k && !(cand < best.back())) return;
    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    if (best.size() > k) best.pop_back();
  };
  const Eigen::Array3i c = cell_of(q);
  for (int r = 0;; ++r) {
    for_each_ring_cell(c, r, dims_, [&](const Eigen::Array3i& cc) {
      for (auto idx : cell(linear_index(cc))) consider(idx);
    });
    bool exhausted = false;
    const double bound = unexplored_bound(q, origin_, cell_size_, c, r, dims_, exhausted);
    if (exhausted) break;
    // Strict: an unexplored point at exactly the bound could win a tie.
    if (best.size() == k && best.back().first < bound) break;
  }
  return best;
}

UniformGrid build_grid(const PointCloud& cloud, double cell_size) {
  return UniformGrid(cloud, cell_size);
}

std::vector<std::uint32_t> candidates_near_triangle(const UniformGrid& grid, const Triangle3& t,
                                                    double d_max) {
  Eigen::AlignedBox3d box(t.v0);
  box.extend(t.v1);
  box.extend(t.v2);
  return grid.candidates_in_box(box.min(), box.max(), d_max);
}

TriangleGrid::TriangleGrid(const TriangleMesh& mesh) : mesh_(&mesh) {
  mesh.validate();
  Eigen::AlignedBox3d box;
  double extent_sum = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    Eigen::AlignedBox3d fb(mesh.vertices[mesh.faces[f][0]]);
    fb.extend(mesh.vertices[mesh.faces[f][1]]);
    fb.extend(mesh.vertices[mesh.faces[f][2]]);
    extent_sum += fb.sizes().maxCoeff();
    box.extend(fb);
  }
  origin_ = box.min();
  cell_size_ = std::max(extent_sum / static_cast<double>(mesh.faces.size()),
                        1e-9 * std::max(1.0, box.sizes().maxCoeff()));
  dims_ = fit_dims(box.min(), box.max(), cell_size_,
                   std::max<std::size_t>(4096, 4 * mesh.faces.size()));

  const std::size_t ncells = std::size_t(dims_.x()) * dims_.y() * dims_.z();
  std::vector<std::pair<Eigen::Array3i, Eigen::Array3i>> ranges(mesh.faces.size());
  cell_start_.assign(ncells + 1, 0);
  auto lin = [this](int x, int y, int z) {
    return (std::size_t(z) * dims_.y() + y) * dims_.x() + x;
  };
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    Eigen::AlignedBox3d fb(mesh.vertices[mesh.faces[f][0]]);
    fb.extend(mesh.vertices[mesh.faces[f][1]]);
    fb.extend(mesh.vertices[mesh.faces[f][2]]);
    ranges[f] = {clamp_cell(((fb.min() - origin_) / cell_size_).array(), dims_),
                 clamp_cell(((fb.max() - origin_) / cell_size_).array(), dims_)};
    const auto& [a, b] = ranges[f];
    for (int z = a.z(); z <= b.z(); ++z)
      for (int y = a.y(); y <= b.y(); ++y)
        for (int x = a.x(); x <= b.x(); ++x) ++cell_start_[lin(x, y, z) + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) cell_start_[c + 1] += cell_start_[c];
  faces_.resize(cell_start_.back());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& [a, b] = ranges[f];
    for (int z = a.z(); z <= b.z(); ++z)
      for (int y = a.y(); y <= b.y(); ++y)
        for (int x = a.x(); x <= b.x(); ++x)
          faces_[fill[lin(x, y, z)]++] = static_cast<std::uint32_t>(f);
  }
}

TriangleGrid::Hit TriangleGrid::closest_point(const Vec3& q) const {
  Hit best;
  best.distance = std::numeric_limits<double>::infinity();
  bool found = false;
  const Eigen::Array3i c = clamp_cell(((q - origin_) / cell_size_).array(), dims_);
  for (int r = 0;; ++r) {
    for_each_ring_cell(c, r, dims_, [&](const Eigen::Array3i& cc) {
      const std::size_t l = (std::size_t(cc.z()) * dims_.y() + cc.y()) * dims_.x() + cc.x();
      for (auto i = cell_start_[l]; i < cell_start_[l + 1]; ++i) {
        const std::uint32_t f = faces_[i];
        const ClosestPoint cp = closest_point_on_triangle(q, mesh_->triangle(f));
        const double d = (cp.point - q).norm();
        if (!found || d < best.distance || (d == best.distance && f < best.face)) {
          best = {f, d, cp};
          found = true;
        }
      }
    });
    bool exhausted = false;
    const double bound = unexplored_bound(q, origin_, cell_size_, c, r, dims_, exhausted);
    if (exhausted) break;
    if (found && best.distance < bound) break;
  }
  return best;
}

}  // namespace pointbake
