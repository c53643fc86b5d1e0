// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/predicates2d.hpp"
#include "tubemesh/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tubemesh {

std::size_t count_free_ends(const VesselTree& tree)
{
    std::size_t n = 0;
    for (const Branch& b : tree.branches()) {
        n += tree.free_start(b.id) ? 1 : 0;
        n += tree.free_end(b.id) ? 1 : 0;
    }
    return n;
}

namespace {

/// Segment [p, q] against triangle (a, b, c), including touching.
bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 dir = q - p;
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 h = dir.cross(e2);
    const double det = e1.dot(h);
    const double scale = e1.norm() * e2.norm() * dir.norm();
    if (std::abs(det) <= 1e-12 * scale) return false; // parallel; coplanar handled separately
    const double inv = 1.0 / det;
    const Vec3 s = p - a;
    const double u = inv * s.dot(h);
    if (u < 0.0 || u > 1.0) return false;
    const Vec3 qv = s.cross(e1);
    const double v = inv * dir.dot(qv);
    if (v < 0.0 || u + v > 1.0) return false;
    const double t = inv * e2.dot(qv);
    return t >= 0.0 && t <= 1.0;
}

} // namespace

bool triangles_intersect_3d(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0, const Vec3& b1,
                            const Vec3& b2)
{
    const Vec3 na = (a1 - a0).cross(a2 - a0);
    const Vec3 nb = (b1 - b0).cross(b2 - b0);
    const double la = na.norm(), lb = nb.norm();
    if (la == 0.0 || lb == 0.0) return false;
    const double size = std::max({(a1 - a0).norm(), (a2 - a0).norm(), (b1 - b0).norm(), (b2 - b0).norm()});
    const bool coplanar = na.cross(nb).norm() <= 1e-9 * la * lb && std::abs((b0 - a0).dot(na / la)) <= 1e-9 * size;
    if (coplanar) {
        Eigen::Index axis = 0;
        na.cwiseAbs().maxCoeff(&axis);
        auto drop = [axis](const Vec3& v) {
            return axis == 0 ? Vec2(v.y(), v.z()) : axis == 1 ? Vec2(v.z(), v.x()) : Vec2(v.x(), v.y());
        };
        return triangles_overlap(drop(a0), drop(a1), drop(a2), drop(b0), drop(b1), drop(b2), 0.0);
    }
    const Vec3 ta[3] = {a0, a1, a2};
    const Vec3 tb[3] = {b0, b1, b2};
    for (int e = 0; e < 3; ++e) {
        if (segment_hits_triangle(ta[e], ta[(e + 1) % 3], b0, b1, b2)) return true;
        if (segment_hits_triangle(tb[e], tb[(e + 1) % 3], a0, a1, a2)) return true;
    }
    return false;
}

TopologyReport topology_check(const TriangleMesh& mesh, std::size_t tree_endpoints)
{
    TopologyReport rep;
    rep.tree_endpoints = tree_endpoints;
    rep.triangles = mesh.triangle_count();
    rep.edges = mesh.edge_map().size();
    std::vector<char> used(mesh.vertex_count(), 0);
    for (const Triangle& t : mesh.triangles()) {
        for (std::uint32_t v : t) used[v] = 1;
    }
    rep.vertices = static_cast<std::size_t>(std::count(used.begin(), used.end(), 1));
    for (std::uint32_t v = 0; v < mesh.vertex_count(); ++v) {
        if (used[v] && mesh.fan_components(v).size() > 1) ++rep.pinched_vertices;
    }
    rep.euler = static_cast<long>(rep.vertices) - static_cast<long>(rep.edges) + static_cast<long>(rep.triangles);

    // Orientation: each directed edge may appear at most once.
    std::map<std::uint64_t, int> directed;
    for (const Triangle& t : mesh.triangles()) {
        for (int e = 0; e < 3; ++e) {
            if (++directed[directed_key(t[e], t[(e + 1) % 3])] > 1) rep.orientation_consistent = false;
        }
    }

    // Boundary loops, walked along boundary half-edges opposite to the triangle direction.
    std::multimap<std::uint32_t, std::uint32_t> next;
    for (const auto& [key, tris] : mesh.edge_map()) {
        if (tris.size() > 2) ++rep.nonmanifold_edges;
        if (tris.size() != 1) continue;
        ++rep.boundary_edges;
        const auto a = static_cast<std::uint32_t>(key >> 32), b = static_cast<std::uint32_t>(key & 0xffffffffu);
        const bool forward = directed.count(directed_key(a, b)) != 0;
        if (forward) next.emplace(b, a);
        else next.emplace(a, b);
    }
    while (!next.empty()) {
        auto it = next.begin();
        const std::uint32_t start = it->first;
        std::uint32_t cur = it->second;
        next.erase(it);
        std::size_t len = 1;
        bool closed = false;
        while (true) {
            if (cur == start) {
                closed = true;
                break;
            }
            auto nx = next.find(cur);
            if (nx == next.end()) break;
            cur = nx->second;
            next.erase(nx);
            ++len;
        }
        if (!closed) rep.loops_closed = false;
        ++rep.boundary_loops;
        rep.loop_lengths.push_back(len);
    }
    std::sort(rep.loop_lengths.begin(), rep.loop_lengths.end());

    // Self-intersections between triangles that share no vertex.
    const auto& tris = mesh.triangles();
    std::vector<Vec3> centers(tris.size());
    std::vector<double> reach(tris.size(), 0.0);
    double max_reach = 0.0;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const Vec3& a = mesh.vertices[tris[t][0]];
        const Vec3& b = mesh.vertices[tris[t][1]];
        const Vec3& c = mesh.vertices[tris[t][2]];
        centers[t] = (a + b + c) / 3.0;
        reach[t] = std::max({(a - centers[t]).norm(), (b - centers[t]).norm(), (c - centers[t]).norm()});
        max_reach = std::max(max_reach, reach[t]);
    }
    KdTree index(centers);
    std::vector<Neighbor> hits;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        index.radius_search(centers[t], reach[t] + max_reach, hits);
        for (const Neighbor& h : hits) {
            const std::size_t u = h.index;
            if (u <= t) continue;
            if (std::sqrt(h.dist2) > reach[t] + reach[u]) continue;
            const Triangle& x = tris[t];
            const Triangle& y = tris[u];
            bool adjacent = false;
            for (std::uint32_t v : x) adjacent |= (v == y[0] || v == y[1] || v == y[2]);
            if (adjacent) continue;
            if (triangles_intersect_3d(mesh.vertices[x[0]], mesh.vertices[x[1]], mesh.vertices[x[2]],
                                       mesh.vertices[y[0]], mesh.vertices[y[1]], mesh.vertices[y[2]])) {
                ++rep.self_intersections;
            }
        }
    }
    return rep;
}

TopologyReport topology_check(const TriangleMesh& mesh, const VesselTree& tree)
{
    return topology_check(mesh, count_free_ends(tree));
}

} // namespace tubemesh
