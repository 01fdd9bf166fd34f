#include "pointbake/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pointbake/predicates.hpp"

namespace pointbake {

using predicates::incircle;
using predicates::orient2d;

std::uint32_t hilbert_index(std::uint32_t x, std::uint32_t y) {
  constexpr std::uint32_t n = 1u << 16;
  std::uint32_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) ? 1 : 0;
    const std::uint32_t ry = (y & s) ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

PatchDelaunay::PatchDelaunay(const Triangle2& seed, std::span<const Vec2> interior) {
  sites_.reserve(3 + interior.size());
  sites_.push_back(seed.a);
  sites_.push_back(seed.b);
  sites_.push_back(seed.c);
  sites_.insert(sites_.end(), interior.begin(), interior.end());

  const int o = orient2d(seed.a, seed.b, seed.c);
  if (o == 0) throw DegenerateTriangle("patch seed triangle is degenerate");
  if (o > 0) tris_.push_back({{0, 1, 2}, {-1, -1, -1}});
  else tris_.push_back({{0, 2, 1}, {-1, -1, -1}});
  tris_.reserve(1 + 2 * interior.size());

  if (interior.empty()) return;

  // Insert along a Hilbert curve over the seed's bounding box so each walk
  // starts next to its target.
  Eigen::AlignedBox2d box(seed.a);
  box.extend(seed.b);
  box.extend(seed.c);
  const Vec2 lo = box.min();
  const Vec2 span = box.sizes().cwiseMax(Vec2::Constant(1e-300));
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const Vec2 q = ((interior[i] - lo).array() / span.array()).matrix() * 65535.0;
    const auto qx = static_cast<std::uint32_t>(std::clamp(q.x(), 0.0, 65535.0));
    const auto qy = static_cast<std::uint32_t>(std::clamp(q.y(), 0.0, 65535.0));
    order[i] = {hilbert_index(qx, qy), static_cast<std::uint32_t>(i + 3)};
  }
  std::sort(order.begin(), order.end());
  for (const auto& [key, site] : order)
    if (!insert(site)) ++skipped_;
}

void PatchDelaunay::replace_neighbor(std::int32_t tri, std::int32_t from, std::int32_t to) {
  if (tri < 0) return;
  for (auto& nb : tris_[tri].n)
    if (nb == from) {
      nb = to;
      return;
    }
}

// Visibility walk. Terminates on Delaunay triangulations; the starting edge
// rotates between steps.
std::int32_t PatchDelaunay::locate(const Vec2& p) {
  std::int32_t t = hint_;
  for (std::size_t steps = 0; steps <= 4 * tris_.size() + 16; ++steps) {
    const Tri& tri = tris_[t];
    bool moved = false;
    const std::uint32_t start = walk_rotation_++ % 3;
    for (std::uint32_t k = 0; k < 3; ++k) {
      const std::uint32_t e = (start + k) % 3;
      const Vec2& a = sites_[tri.v[(e + 1) % 3]];
      const Vec2& b = sites_[tri.v[(e + 2) % 3]];
      if (orient2d(a, b, p) < 0) {
        if (tri.n[e] < 0) throw std::logic_error("patch site lies outside the seed triangle");
        t = tri.n[e];
        moved = true;
        break;
      }
    }
    if (!moved) return t;
  }
  throw std::logic_error("point location walk did not terminate");
}

bool PatchDelaunay::insert(std::uint32_t site) {
  const Vec2& p = sites_[site];
  const std::int32_t t = locate(p);
  const Tri tri = tris_[t];
  int zeros = 0, on_edge = -1;
  for (int e = 0; e < 3; ++e)
    if (orient2d(sites_[tri.v[(e + 1) % 3]], sites_[tri.v[(e + 2) % 3]], p) == 0) {
      ++zeros;
      on_edge = e;
    }
  if (zeros >= 2) return false;

  if (zeros == 0) {
    // Split (a, b, c) into (p, b, c), (p, c, a), (p, a, b).
    const auto a = tri.v[0], b = tri.v[1], c = tri.v[2];
    const auto na = tri.n[0], nb = tri.n[1], nc = tri.n[2];
    const auto t0 = t;
    const auto t1 = static_cast<std::int32_t>(tris_.size());
    const auto t2 = t1 + 1;
    tris_[t0] = {{site, b, c}, {na, t1, t2}};
    tris_.push_back({{site, c, a}, {nb, t2, t0}});
    tris_.push_back({{site, a, b}, {nc, t0, t1}});
    replace_neighbor(nb, t, t1);
    replace_neighbor(nc, t, t2);
    stack_.push_back({t0, 0});
    stack_.push_back({t1, 0});
    stack_.push_back({t2, 0});
    hint_ = t0;
  } else {
    // p lies on the edge opposite tri.v[on_edge]; interior sites never touch
    // the hull, so the neighbor across it exists.
    const int i = on_edge;
    const auto a = tri.v[i], b = tri.v[(i + 1) % 3], c = tri.v[(i + 2) % 3];
    const auto n_ca = tri.n[(i + 1) % 3], n_ab = tri.n[(i + 2) % 3];
    const std::int32_t u = tri.n[i];
    if (u < 0) throw std::logic_error("patch site lies on the seed boundary");
    const Tri ut = tris_[u];
    int j = 0;
    while (ut.n[j] != t) ++j;
    const auto d = ut.v[j];
    const auto n_bd = ut.n[(j + 1) % 3], n_dc = ut.n[(j + 2) % 3];
    const auto t1 = static_cast<std::int32_t>(tris_.size());
    const auto t3 = t1 + 1;
    tris_[t] = {{a, b, site}, {t3, t1, n_ab}};
    tris_.push_back({{a, site, c}, {u, n_ca, t}});
    tris_[u] = {{d, c, site}, {t1, t3, n_dc}};
    tris_.push_back({{d, site, b}, {t, n_bd, u}});
    replace_neighbor(n_ca, t, t1);
    replace_neighbor(n_bd, u, t3);
    stack_.push_back({t, 2});
    stack_.push_back({t1, 1});
    stack_.push_back({u, 2});
    stack_.push_back({t3, 1});
    hint_ = t;
  }
  legalize();
  return true;
}

void PatchDelaunay::legalize() {
  while (!stack_.empty()) {
    const auto [t, i] = stack_.back();
    stack_.pop_back();
    const Tri tri = tris_[t];
    const std::int32_t u = tri.n[i];
    if (u < 0) continue;
    const auto p = tri.v[i], b = tri.v[(i + 1) % 3], c = tri.v[(i + 2) % 3];
    const Tri ut = tris_[u];
    int j = 0;
    while (ut.n[j] != t) ++j;
    const auto d = ut.v[j];
    if (incircle(sites_[p], sites_[b], sites_[c], sites_[d]) <= 0) continue;

    const auto a1 = tri.n[(i + 1) % 3], a2 = tri.n[(i + 2) % 3];
    const auto b_bd = ut.n[(j + 1) % 3], b_dc = ut.n[(j + 2) % 3];
    tris_[t] = {{p, b, d}, {b_bd, u, a2}};
    tris_[u] = {{p, d, c}, {b_dc, a1, t}};
    replace_neighbor(b_bd, u, t);
    replace_neighbor(a1, t, u);
    stack_.push_back({t, 0});
    stack_.push_back({u, 0});
  }
}

}  // namespace pointbake
