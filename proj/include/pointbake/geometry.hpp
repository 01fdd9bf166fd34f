#pragma once

// Vector, triangle and barycentric primitives. Everything here is a pure
// function templated on the scalar type; the rest of the library uses the
// double-precision aliases at the bottom of the file.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pointbake/errors.hpp"

namespace pointbake {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

/// Barycentric weights (w0, w1, w2) with respect to a triangle's vertices.
template <typename Scalar>
struct BarycentricT {
  Vector3<Scalar> w = Vector3<Scalar>::Zero();

  BarycentricT() = default;
  explicit BarycentricT(const Vector3<Scalar>& weights) : w(weights) {}
  BarycentricT(Scalar w0, Scalar w1, Scalar w2) : w(w0, w1, w2) {}

  Scalar operator[](int i) const { return w[i]; }
  Scalar sum() const { return w.sum(); }
  Scalar min() const { return w.minCoeff(); }

  static constexpr Scalar kInsideTolerance = Scalar(1e-9);
  bool inside() const { return w.minCoeff() >= -kInsideTolerance; }
};

template <typename Scalar>
struct Triangle3T {
  Vector3<Scalar> v0, v1, v2;

  const Vector3<Scalar>& operator[](int i) const { return i == 0 ? v0 : (i == 1 ? v1 : v2); }
  Vector3<Scalar> centroid() const { return (v0 + v1 + v2) / Scalar(3); }
  Scalar area() const { return Scalar(0.5) * (v1 - v0).cross(v2 - v0).norm(); }
};

template <typename Scalar>
struct Triangle2T {
  Vector2<Scalar> a, b, c;

  const Vector2<Scalar>& operator[](int i) const { return i == 0 ? a : (i == 1 ? b : c); }
  Vector2<Scalar> centroid() const { return (a + b + c) / Scalar(3); }
  /// Positive for counter-clockwise winding.
  Scalar signed_area() const {
    return Scalar(0.5) * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }
};

inline constexpr double kMinTriangleArea3 = 1e-12;
inline constexpr double kMinTriangleArea2 = 1e-14;

template <typename Scalar>
void require_nondegenerate(const Triangle3T<Scalar>& t) {
  if (!(t.area() > Scalar(kMinTriangleArea3)))
    throw DegenerateTriangle("3D triangle area below 1e-12");
}

template <typename Scalar>
Vector3<Scalar> triangle_normal(const Triangle3T<Scalar>& t) {
  require_nondegenerate(t);
  return (t.v1 - t.v0).cross(t.v2 - t.v0).normalized();
}

/// Barycentric coordinates of the orthogonal projection of p onto the plane of t.
template <typename Scalar>
BarycentricT<Scalar> barycentric_of(const Vector3<Scalar>& p, const Triangle3T<Scalar>& t) {
  require_nondegenerate(t);
  const Vector3<Scalar> e1 = t.v1 - t.v0;
  const Vector3<Scalar> e2 = t.v2 - t.v0;
  const Vector3<Scalar> d = p - t.v0;
  // Normal equations of the least-squares fit d ~ u*e1 + v*e2; the residual is
  // the out-of-plane component, so (u, v) describe the projected point.
  const Scalar d11 = e1.dot(e1), d12 = e1.dot(e2), d22 = e2.dot(e2);
  const Scalar r1 = d.dot(e1), r2 = d.dot(e2);
  const Scalar det = d11 * d22 - d12 * d12;
  const Scalar u = (d22 * r1 - d12 * r2) / det;
  const Scalar v = (d11 * r2 - d12 * r1) / det;
  return BarycentricT<Scalar>(Scalar(1) - u - v, u, v);
}

/// Affine combination w0*a + w1*b + w2*c.
template <typename Scalar>
Vector2<Scalar> apply_barycentric(const BarycentricT<Scalar>& b, const Triangle2T<Scalar>& t) {
  return b.w[0] * t.a + b.w[1] * t.b + b.w[2] * t.c;
}

template <typename Scalar>
Vector3<Scalar> apply_barycentric(const BarycentricT<Scalar>& b, const Triangle3T<Scalar>& t) {
  return b.w[0] * t.v0 + b.w[1] * t.v1 + b.w[2] * t.v2;
}

/// Closest point on the closed triangle, together with its barycentric weights.
template <typename Scalar>
struct ClosestPointT {
  Vector3<Scalar> point;
  BarycentricT<Scalar> weights;
};

// Voronoi-region walk over vertices, edges and the interior.
template <typename Scalar>
ClosestPointT<Scalar> closest_point_on_triangle(const Vector3<Scalar>& p,
                                                const Triangle3T<Scalar>& t) {
  using B = BarycentricT<Scalar>;
  const Vector3<Scalar>&a = t.v0, &b = t.v1, &c = t.v2;
  const Vector3<Scalar> ab = b - a, ac = c - a, ap = p - a;
  const Scalar d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return {a, B(1, 0, 0)};

  const Vector3<Scalar> bp = p - b;
  const Scalar d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return {b, B(0, 1, 0)};

  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const Scalar v = d1 / (d1 - d3);
    return {a + v * ab, B(1 - v, v, 0)};
  }

  const Vector3<Scalar> cp = p - c;
  const Scalar d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return {c, B(0, 0, 1)};

  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const Scalar w = d2 / (d2 - d6);
    return {a + w * ac, B(1 - w, 0, w)};
  }

  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const Scalar w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {b + w * (c - b), B(0, 1 - w, w)};
  }

  const Scalar denom = Scalar(1) / (va + vb + vc);
  const Scalar v = vb * denom, w = vc * denom;
  return {a + ab * v + ac * w, B(1 - v - w, v, w)};
}

/// Exact Euclidean distance from p to the closed triangle.
template <typename Scalar>
Scalar point_triangle_distance(const Vector3<Scalar>& p, const Triangle3T<Scalar>& t) {
  require_nondegenerate(t);
  return (p - closest_point_on_triangle(p, t).point).norm();
}

/// Angle between two unit vectors in degrees, in [0, 180].
template <typename Scalar>
Scalar normal_angle_deg(const Vector3<Scalar>& a, const Vector3<Scalar>& b) {
  const Scalar c = std::clamp(a.dot(b), Scalar(-1), Scalar(1));
  return std::acos(c) * Scalar(180) / std::numbers::pi_v<Scalar>;
}

using Vec3 = Vector3<double>;
using Vec2 = Vector2<double>;
// Unit-length by convention; producers renormalize.
using UnitVec3 = Vector3<double>;
using Barycentric = BarycentricT<double>;
using Triangle3 = Triangle3T<double>;
using Triangle2 = Triangle2T<double>;
using ClosestPoint = ClosestPointT<double>;

}  // namespace pointbake
