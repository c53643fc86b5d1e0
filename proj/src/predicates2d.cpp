// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/predicates2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace tubemesh {

Circle min_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c)
{
    const double d = orient2d(a, b, c);
    if (std::abs(d) <= 1e-12) throw Error(ErrorCode::DegenerateTriangle, "collinear circumcircle input");
    const Vec2 ab = b - a, ac = c - a;
    const double ab2 = ab.squaredNorm(), ac2 = ac.squaredNorm();
    const Vec2 off((ac.y() * ab2 - ab.y() * ac2) / (2.0 * d), (ab.x() * ac2 - ac.x() * ab2) / (2.0 * d));
    return {a + off, off.norm()};
}

namespace {

int sign_eps(double v, double eps)
{
    if (v > eps) return 1;
    if (v < -eps) return -1;
    return 0;
}

} // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps)
{
    const double lab = (b - a).norm(), lcd = (d - c).norm();
    // Orientation values are areas; scale the length tolerance accordingly.
    const int o1 = sign_eps(orient2d(a, b, c), eps * lab);
    const int o2 = sign_eps(orient2d(a, b, d), eps * lab);
    const int o3 = sign_eps(orient2d(c, d, a), eps * lcd);
    const int o4 = sign_eps(orient2d(c, d, b), eps * lcd);

    if (o1 == 0 && o2 == 0) {
        if (lab == 0.0 || lcd == 0.0) return false;
        const Vec2 dir = (b - a) / lab;
        const double c0 = (c - a).dot(dir), c1 = (d - a).dot(dir);
        const double lo = std::max(0.0, std::min(c0, c1));
        const double hi = std::min(lab, std::max(c0, c1));
        return hi - lo > eps;
    }
    return o1 * o2 < 0 && o3 * o4 < 0;
}

bool triangles_overlap(const Vec2& a0, const Vec2& a1, const Vec2& a2, const Vec2& b0, const Vec2& b1,
                       const Vec2& b2, double eps)
{
    const std::array<Vec2, 3> ta{a0, a1, a2};
    const std::array<Vec2, 3> tb{b0, b1, b2};
    auto separated = [&](const std::array<Vec2, 3>& tri) {
        for (int e = 0; e < 3; ++e) {
            const Vec2 edge = tri[(e + 1) % 3] - tri[e];
            const double len = edge.norm();
            if (len == 0.0) continue;
            const Vec2 axis(-edge.y() / len, edge.x() / len);
            double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
            for (const Vec2& p : ta) {
                const double v = axis.dot(p);
                amin = std::min(amin, v);
                amax = std::max(amax, v);
            }
            for (const Vec2& p : tb) {
                const double v = axis.dot(p);
                bmin = std::min(bmin, v);
                bmax = std::max(bmax, v);
            }
            if (amax <= bmin + eps || bmax <= amin + eps) return true;
        }
        return false;
    };
    return !separated(ta) && !separated(tb);
}

} // namespace tubemesh
