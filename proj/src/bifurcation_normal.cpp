// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/relaxation.hpp"

#include <cmath>
#include <limits>

namespace tubemesh {

namespace {

struct SaddleMatch {
    const BifurcationInfo* bif = nullptr;
    Vec3 dir1, dir2, mid;
};

/// High-curvature test: near a junction, between two acute branch directions.
std::optional<SaddleMatch> match_saddle(const Vec3& p, const VesselTree& tree, double mid_angle_deg)
{
    const double cos_limit = std::cos(mid_angle_deg * kPi / 180.0);
    std::optional<SaddleMatch> best;
    double best_cos = -2.0;
    for (const auto& bif : tree.bifurcations()) {
        const Vec3 rel = p - bif.center;
        const double dist = rel.norm();
        if (!(dist < 1.5 * bif.local_radius) || dist == 0.0) continue;
        const Vec3 dir = rel / dist;
        const auto& dirs = bif.branch_dirs;
        for (std::size_t a = 0; a < dirs.size(); ++a) {
            for (std::size_t b = a + 1; b < dirs.size(); ++b) {
                if (!(dirs[a].dot(dirs[b]) > 0.0)) continue;
                const Vec3 mid = (dirs[a] + dirs[b]).normalized();
                const double c = mid.dot(dir);
                if (c > cos_limit && c > best_cos) {
                    best_cos = c;
                    best = SaddleMatch{&bif, dirs[a], dirs[b], mid};
                }
            }
        }
    }
    return best;
}

Vec3 foot_on_ray(const Vec3& p, const Vec3& origin, const Vec3& dir)
{
    return origin + std::max(0.0, (p - origin).dot(dir)) * dir;
}

double distance_to_ray(const Vec3& p, const Vec3& origin, const Vec3& dir)
{
    return (p - foot_on_ray(p, origin, dir)).norm();
}

/// Angle at q between q->a and q->b; pi/2 when q->b vanishes.
double angle_at(const Vec3& q, const Vec3& a, const Vec3& b)
{
    const Vec3 x = a - q, y = b - q;
    const double nx = x.norm(), ny = y.norm();
    if (nx == 0.0) return 0.0;
    if (ny <= 1e-12 * nx) return 0.5 * kPi;
    return std::atan2(x.cross(y).norm(), x.dot(y));
}

} // namespace

NormalInfo particle_normal_info(const Vec3& p, const ClosestPoint& closest, const VesselTree& tree, PivotRule pivot_rule,
                                double mid_angle_deg)
{
    auto radial = [&]() {
        const Vec3 off = p - closest.point;
        const Vec3 radial_off = off - off.dot(closest.tangent) * closest.tangent;
        if (radial_off.norm() > 1e-12) return Vec3(radial_off.normalized());
        if (off.norm() > 0.0) return Vec3(off.normalized());
        return any_orthogonal(closest.tangent);
    };

    const auto match = match_saddle(p, tree, mid_angle_deg);
    if (!match) return {radial(), false, false};

    const Vec3& c = match->bif->center;
    Vec3 n_plane = match->dir1.cross(match->dir2);
    if (n_plane.norm() < 1e-12) return {radial(), true, true};
    n_plane.normalize();
    if ((p - c).dot(n_plane) < 0.0) n_plane = -n_plane;

    const Vec3 fallback = (p - c).normalized();
    const Vec3 p_proj = p - (p - c).dot(n_plane) * n_plane;
    const double height = (p - p_proj).norm();
    if (height <= 1e-12 * (p - c).norm()) return {fallback, true, true};

    const Vec3 q1 = foot_on_ray(p, c, match->dir1);
    const Vec3 q2 = foot_on_ray(p, c, match->dir2);

    Vec3 pivot;
    if (pivot_rule == PivotRule::BisectorProjection) {
        pivot = c + (p - c).dot(match->mid) * match->mid;
    } else {
        // Line from the nearer ray's foot point through p_proj, cut by the bisector.
        const bool first = (p - q1).norm() <= (p - q2).norm();
        const Vec3& q = first ? q1 : q2;
        const Vec3 w = n_plane.cross(match->mid);
        const Vec3 dq = q - c, dl = p_proj - q;
        const double lw = dl.dot(w);
        const double scale = std::max(dq.norm(), dl.norm());
        if (dl.norm() <= 1e-12 * std::max(scale, 1.0)) {
            // p sits over the ray: the crotch construction reduces to the plane normal.
            return {n_plane, true, false};
        }
        if (std::abs(lw) <= 1e-12 * dl.norm()) return {fallback, true, true};
        const double t = -dq.dot(w) / lw;
        if (t < 0.0) {
            // p_proj lies on the outer side of the nearer ray: tube normal of that ray.
            const Vec3 off = p - q;
            return {off.norm() > 0.0 ? Vec3(off.normalized()) : radial(), true, false};
        }
        pivot = q + t * dl;
    }

    const double d1 = distance_to_ray(pivot, c, match->dir1);
    const double d2 = distance_to_ray(pivot, c, match->dir2);
    const double a1 = angle_at(q1, p, p_proj);
    const double a2 = angle_at(q2, p, p_proj);
    const double tan1 = std::tan(a1), tan2 = std::tan(a2);
    if (!std::isfinite(tan1) || !std::isfinite(tan2) || a1 >= 0.5 * kPi || a2 >= 0.5 * kPi) {
        return {n_plane, true, false};
    }
    const double lambda = 0.5 * (d1 * tan1 + d2 * tan2);
    const Vec3 target = pivot + lambda * n_plane;
    const Vec3 dir = target - p;
    if (dir.norm() < 1e-6 * height || dir.norm() == 0.0) return {fallback, true, true};
    return {dir.normalized(), true, false};
}

Vec3 particle_normal(const Particle& particle, const VesselTree& tree, PivotRule pivot)
{
    return particle_normal_info(particle.position, particle.closest, tree, pivot).normal;
}

} // namespace tubemesh
