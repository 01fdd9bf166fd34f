#pragma once

#include "pointbake/geometry.hpp"

namespace pointbake::predicates {

/// Sign of the orientation determinant: +1 if (a, b, c) turn counter-clockwise,
/// -1 if clockwise, 0 if exactly collinear. Exact for all finite inputs.
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// +1 if d lies strictly inside the circle through counter-clockwise (a, b, c),
/// -1 if outside, 0 if cocircular. Exact for all finite inputs.
int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace pointbake::predicates
