// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/common.hpp"

namespace tubemesh {

struct Circle {
    Vec2 center;
    double radius;
};

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

/// Circumscribed circle of a triangle. Throws DegenerateTriangle when twice
/// the area is at most 1e-12.
Circle min_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c);

/// True iff the open segments (a,b) and (c,d) cross or overlap collinearly
/// with positive length. Touching at a single point never counts.
/// `eps` is a length tolerance.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps = 0.0);

/// True iff the interiors of two triangles overlap by more than `eps`
/// (separating-axis test). Triangles meeting along an edge or at a vertex do
/// not overlap.
bool triangles_overlap(const Vec2& a0, const Vec2& a1, const Vec2& a2, const Vec2& b0, const Vec2& b1,
                       const Vec2& b2, double eps = 0.0);

} // namespace tubemesh
