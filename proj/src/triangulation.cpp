// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/triangulation.hpp"

#include "tubemesh/predicates2d.hpp"
#include "tubemesh/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <tuple>

namespace tubemesh {

namespace {

constexpr double kCreaseDot = 0.5;

} // namespace

PointSet::PointSet(std::vector<Vec3> p, std::vector<Vec3> n, std::vector<char> r)
    : positions(std::move(p)), normals(std::move(n)), rim(std::move(r))
{
    if (normals.size() != positions.size()) throw Error(ErrorCode::InvalidParams, "one normal per point required");
    if (rim.empty()) rim.assign(positions.size(), 0);
    if (rim.size() != positions.size()) throw Error(ErrorCode::InvalidParams, "one rim flag per point required");
    index.build(positions);
}

PointSet PointSet::from_particles(const ParticleSystem& system)
{
    std::vector<Vec3> p, n;
    std::vector<char> r;
    for (const Particle& pt : system.particles()) {
        p.push_back(pt.position);
        n.push_back(pt.normal);
        r.push_back(pt.on_end_plane ? 1 : 0);
    }
    return PointSet(std::move(p), std::move(n), std::move(r));
}

void TriangulationParams::validate() const
{
    if (neighbor_count < 6) throw Error(ErrorCode::InvalidParams, "neighbor_count must be at least 6");
    if (completion_passes < 0) throw Error(ErrorCode::InvalidParams, "completion_passes must be non-negative");
    if (max_hole_edges < 0) throw Error(ErrorCode::InvalidParams, "max_hole_edges must be non-negative");
}

bool InsertionQueue::push(std::uint32_t v)
{
    if (v >= queued.size()) queued.resize(v + 1, 0);
    if (queued[v]) return false;
    queued[v] = 1;
    order.push_back(v);
    return true;
}

Neighborhood2D project_neighborhood(const PointSet& points, const TriangleMesh& mesh, std::uint32_t i,
                                    std::size_t count)
{
    Neighborhood2D nb;
    nb.center = i;
    nb.members.push_back(i);
    const auto hits = points.index.knn(points.positions[i], count + 1);
    for (const Neighbor& h : hits) {
        if (h.index != i && nb.members.size() < count + 1) nb.members.push_back(h.index);
    }
    // Mesh neighbors keep the current fan visible even when they are not among the nearest.
    if (i < mesh.vertex_count()) {
        std::vector<std::uint32_t> extra;
        for (std::uint32_t t : mesh.vertex_triangles(i)) {
            for (std::uint32_t v : mesh.triangles()[t]) {
                if (std::find(nb.members.begin(), nb.members.end(), v) == nb.members.end()) extra.push_back(v);
            }
        }
        std::sort(extra.begin(), extra.end());
        extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
        nb.members.insert(nb.members.end(), extra.begin(), extra.end());
    }

    // Mean member normal when the neighborhood spans a crease.
    Vec3 n = points.normals[i];
    Vec3 sum = Vec3::Zero();
    bool crease = false;
    for (std::uint32_t m : nb.members) {
        crease |= points.normals[m].dot(n) < kCreaseDot;
        sum += points.normals[m];
    }
    if (crease && sum.norm() > 1e-9) n = sum.normalized();
    const Vec3 e1 = any_orthogonal(n);
    const Vec3 e2 = n.cross(e1);
    const Vec3& o = points.positions[i];
    double diameter = 0.0;
    for (std::uint32_t m : nb.members) {
        const Vec3 d = points.positions[m] - o;
        nb.coords.emplace_back(d.dot(e1), d.dot(e2));
        diameter = std::max(diameter, 2.0 * nb.coords.back().norm());
    }
    nb.eps = 1e-9 * diameter;

    // T_exist: mesh triangles with all three vertices among the members.
    if (mesh.triangle_count() > 0) {
        auto local_of = [&](std::uint32_t v) -> std::int64_t {
            const auto it = std::find(nb.members.begin(), nb.members.end(), v);
            return it == nb.members.end() ? -1 : it - nb.members.begin();
        };
        std::vector<std::uint32_t> seen;
        for (std::uint32_t m : nb.members) {
            if (m >= mesh.vertex_count()) continue;
            for (std::uint32_t t : mesh.vertex_triangles(m)) seen.push_back(t);
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (std::uint32_t t : seen) {
            const Triangle& tri = mesh.triangles()[t];
            const std::int64_t a = local_of(tri[0]), b = local_of(tri[1]), c = local_of(tri[2]);
            if (a < 0 || b < 0 || c < 0) continue;
            nb.existing.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                                   static_cast<std::uint32_t>(c)});
        }
    }
    return nb;
}

namespace {

bool share(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d)
{
    return a == c || a == d || b == c || b == d;
}

struct Box2 {
    Vec2 lo, hi;
};

Box2 box_of(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return {a.cwiseMin(b).cwiseMin(c), a.cwiseMax(b).cwiseMax(c)};
}

bool boxes_touch(const Box2& x, const Box2& y, double eps)
{
    return x.lo.x() <= y.hi.x() + eps && y.lo.x() <= x.hi.x() + eps && x.lo.y() <= y.hi.y() + eps &&
           y.lo.y() <= x.hi.y() + eps;
}

bool blocked_by(const Neighborhood2D& nb, const Triangle& cand, const Triangle& ex)
{
    const auto& p = nb.coords;
    if (!boxes_touch(box_of(p[cand[0]], p[cand[1]], p[cand[2]]), box_of(p[ex[0]], p[ex[1]], p[ex[2]]), nb.eps)) {
        return false;
    }
    for (int e = 0; e < 3; ++e) {
        const std::uint32_t a = cand[e], b = cand[(e + 1) % 3];
        for (int f = 0; f < 3; ++f) {
            const std::uint32_t c = ex[f], d = ex[(f + 1) % 3];
            if (share(a, b, c, d)) continue;
            if (segments_intersect(p[a], p[b], p[c], p[d], nb.eps)) return true;
        }
    }
    return triangles_overlap(p[cand[0]], p[cand[1]], p[cand[2]], p[ex[0]], p[ex[1]], p[ex[2]], nb.eps);
}

} // namespace

bool blocked_by_existing(const Neighborhood2D& nb, std::uint32_t a, std::uint32_t b, std::uint32_t c)
{
    const Triangle cand{a, b, c};
    for (const Triangle& ex : nb.existing) {
        if (blocked_by(nb, cand, ex)) return true;
    }
    return false;
}

namespace {

/// In-circle members of the candidate that are not walled off by T_exist.
bool circle_violated(const Neighborhood2D& nb, std::uint32_t k1, std::uint32_t k2, const Circle& circle)
{
    const double limit = circle.radius - nb.eps;
    for (std::uint32_t t = 1; t < nb.members.size(); ++t) {
        if (t == k1 || t == k2) continue;
        if ((nb.coords[t] - circle.center).norm() >= limit) continue;
        if (nb.existing.empty()) return true;
        if (!blocked_by_existing(nb, t, k1, k2) || !blocked_by_existing(nb, t, 0, k1) ||
            !blocked_by_existing(nb, t, 0, k2)) {
            return true;
        }
    }
    return false;
}

} // namespace

bool candidate_valid(const Neighborhood2D& nb, std::uint32_t k1, std::uint32_t k2)
{
    if (k1 == 0 || k2 == 0 || k1 == k2 || k1 >= nb.coords.size() || k2 >= nb.coords.size()) return false;
    const auto& p = nb.coords;
    const double area2 = orient2d(p[0], p[k1], p[k2]);
    const double scale = std::max({(p[k1] - p[0]).norm(), (p[k2] - p[0]).norm(), (p[k2] - p[k1]).norm()});
    if (std::abs(area2) <= std::max(1e-12, nb.eps * scale)) return false;
    if (blocked_by_existing(nb, 0, k1, k2)) return false;
    return !circle_violated(nb, k1, k2, min_circumcircle(p[0], p[k1], p[k2]));
}

std::vector<Triangle> insert_point(const PointSet& points, TriangleMesh& mesh, InsertionQueue& queue,
                                   std::uint32_t i, std::size_t count)
{
    std::vector<Triangle> accepted;
    Neighborhood2D nb = project_neighborhood(points, mesh, i, count);
    const auto& p = nb.coords;

    struct Candidate {
        double radius;
        std::uint32_t k1, k2; // local, counter-clockwise with the center
        std::uint32_t g1, g2; // global, g1 < g2 for ordering
    };
    std::vector<Candidate> cands;
    for (std::uint32_t a = 1; a < nb.members.size(); ++a) {
        for (std::uint32_t b = a + 1; b < nb.members.size(); ++b) {
            const double area2 = orient2d(p[0], p[a], p[b]);
            const double scale = std::max({(p[a] - p[0]).norm(), (p[b] - p[0]).norm(), (p[b] - p[a]).norm()});
            if (std::abs(area2) <= std::max(1e-12, nb.eps * scale)) continue;
            const Circle c = min_circumcircle(p[0], p[a], p[b]);
            const std::uint32_t ka = area2 > 0 ? a : b, kb = area2 > 0 ? b : a;
            cands.push_back({c.radius, ka, kb, std::min(nb.members[a], nb.members[b]),
                             std::max(nb.members[a], nb.members[b])});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
        if (x.radius != y.radius) return x.radius < y.radius;
        if (x.g1 != y.g1) return x.g1 < y.g1;
        return x.g2 < y.g2;
    });

    for (const Candidate& c : cands) {
        const std::uint32_t v1 = nb.members[c.k1], v2 = nb.members[c.k2];
        // Global guards: no duplicates, no third triangle on an edge, consistent orientation.
        if (mesh.has_triangle(i, v1, v2)) continue;
        if (mesh.has_directed_edge(i, v1) || mesh.has_directed_edge(v1, v2) || mesh.has_directed_edge(v2, i)) continue;
        if (mesh.edge_triangles(i, v1).size() >= 2 || mesh.edge_triangles(v1, v2).size() >= 2 ||
            mesh.edge_triangles(v2, i).size() >= 2) {
            continue;
        }
        if (!candidate_valid(nb, c.k1, c.k2)) continue;

        const Triangle tri{i, v1, v2};
        try {
            mesh.add_triangle(tri);
        } catch (const Error&) {
            continue;
        }
        nb.existing.push_back({0, c.k1, c.k2});
        accepted.push_back(tri);
        queue.push(v1);
        queue.push(v2);
    }
    return accepted;
}

namespace {

bool fan_closed(const TriangleMesh& mesh, std::uint32_t v)
{
    const auto& tris = mesh.vertex_triangles(v);
    if (tris.empty()) return false;
    for (std::uint32_t t : tris) {
        for (std::uint32_t w : mesh.triangles()[t]) {
            if (w != v && mesh.edge_triangles(v, w).size() != 2) return false;
        }
    }
    return true;
}

std::vector<MeshDefect> find_defects(const TriangleMesh& mesh, const std::vector<char>& rim)
{
    std::vector<MeshDefect> out;
    for (const auto& [key, tris] : mesh.edge_map()) {
        const auto a = static_cast<std::uint32_t>(key >> 32), b = static_cast<std::uint32_t>(key & 0xffffffffu);
        if (tris.size() > 2) out.push_back({a, b, "nonmanifold_edge"});
        else if (tris.size() == 1 && !(rim[a] && rim[b])) out.push_back({a, b, "open_edge"});
    }
    std::sort(out.begin(), out.end(), [](const MeshDefect& x, const MeshDefect& y) {
        return std::tie(x.a, x.b, x.kind) < std::tie(y.a, y.b, y.kind);
    });
    return out;
}

/// Closed loops of boundary half-edges.
std::vector<std::vector<std::uint32_t>> boundary_loops(const TriangleMesh& mesh)
{
    std::map<std::uint32_t, std::vector<std::uint32_t>> next;
    for (const auto& [key, tris] : mesh.edge_map()) {
        if (tris.size() != 1) continue;
        const auto a = static_cast<std::uint32_t>(key >> 32), b = static_cast<std::uint32_t>(key & 0xffffffffu);
        if (mesh.has_directed_edge(a, b)) next[b].push_back(a);
        else next[a].push_back(b);
    }
    for (auto& [v, out] : next) std::sort(out.begin(), out.end(), std::greater<>());
    std::vector<std::vector<std::uint32_t>> loops;
    while (!next.empty()) {
        const std::uint32_t start = next.begin()->first;
        std::vector<std::uint32_t> loop{start};
        std::uint32_t cur = start;
        bool closed = false;
        while (true) {
            const auto it = next.find(cur);
            if (it == next.end()) break;
            const std::uint32_t to = it->second.back();
            it->second.pop_back();
            if (it->second.empty()) next.erase(it);
            if (to == start) {
                closed = true;
                break;
            }
            loop.push_back(to);
            cur = to;
        }
        if (closed) loops.push_back(std::move(loop));
    }
    return loops;
}

/// Polygons to fill from one boundary loop: the whole loop when it has no
/// rim-rim edge, nothing when it is all rim, otherwise every run of non-rim
/// edges closed by a chord between its two rim ends.
std::vector<std::vector<std::uint32_t>> fill_polygons(const std::vector<std::uint32_t>& loop,
                                                      const std::vector<char>& rim)
{
    const std::size_t m = loop.size();
    auto rim_edge = [&](std::size_t k) { return rim[loop[k]] && rim[loop[(k + 1) % m]]; };
    std::size_t first_rim = m;
    for (std::size_t k = 0; k < m && first_rim == m; ++k) {
        if (rim_edge(k)) first_rim = k;
    }
    if (first_rim == m) return {loop};
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> run;
    for (std::size_t step = 1; step <= m; ++step) {
        const std::size_t k = (first_rim + step) % m;
        if (rim_edge(k)) {
            if (run.size() >= 3) out.push_back(run);
            run.clear();
            continue;
        }
        if (run.empty()) run.push_back(loop[k]);
        run.push_back(loop[(k + 1) % m]);
    }
    return out;
}

bool can_add(const TriangleMesh& mesh, std::uint32_t a, std::uint32_t b, std::uint32_t c)
{
    if (mesh.has_triangle(a, b, c)) return false;
    if (mesh.has_directed_edge(a, b) || mesh.has_directed_edge(b, c) || mesh.has_directed_edge(c, a)) return false;
    return mesh.edge_triangles(a, b).size() < 2 && mesh.edge_triangles(b, c).size() < 2 &&
           mesh.edge_triangles(c, a).size() < 2;
}

/// Whether triangle (a, b, c) would cut a nearby mesh triangle sharing none of its vertices.
bool crosses_mesh(const PointSet& points, const TriangleMesh& mesh, std::uint32_t a, std::uint32_t b, std::uint32_t c)
{
    const Vec3& pa = points.positions[a];
    const Vec3& pb = points.positions[b];
    const Vec3& pc = points.positions[c];
    const Vec3 center = (pa + pb + pc) / 3.0;
    const double longest = std::max({(pa - pb).norm(), (pb - pc).norm(), (pc - pa).norm()});
    std::vector<Neighbor> near;
    points.index.radius_search(center, 3.0 * longest, near);
    std::vector<std::uint32_t> tris;
    for (const Neighbor& h : near) {
        const auto& vt = mesh.vertex_triangles(h.index);
        tris.insert(tris.end(), vt.begin(), vt.end());
    }
    std::sort(tris.begin(), tris.end());
    tris.erase(std::unique(tris.begin(), tris.end()), tris.end());
    for (std::uint32_t t : tris) {
        const Triangle& x = mesh.triangles()[t];
        bool shared = false;
        for (std::uint32_t v : x) shared |= v == a || v == b || v == c;
        if (shared) continue;
        if (triangles_intersect_3d(pa, pb, pc, points.positions[x[0]], points.positions[x[1]], points.positions[x[2]])) {
            return true;
        }
    }
    return false;
}

/// Ear-clips one hole in its mean-normal plane, best quality ear first.
bool fill_loop(const PointSet& points, TriangleMesh& mesh, std::vector<std::uint32_t> loop)
{
    Vec3 n = Vec3::Zero();
    Vec3 o = Vec3::Zero();
    for (std::uint32_t v : loop) {
        n += points.normals[v];
        o += points.positions[v];
    }
    if (n.norm() <= 1e-9) return false;
    n.normalize();
    o /= static_cast<double>(loop.size());
    const Vec3 e1 = any_orthogonal(n);
    const Vec3 e2 = n.cross(e1);
    auto flat = [&](std::uint32_t v) {
        const Vec3 d = points.positions[v] - o;
        return Vec2(d.dot(e1), d.dot(e2));
    };

    while (loop.size() >= 3) {
        const std::size_t m = loop.size();
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = m;
        // Strict pass: convex, empty ears in the plane. Relaxed pass: any ear
        // facing the same way as its vertex normals.
        for (int relaxed = 0; relaxed < 2 && pick == m; ++relaxed) {
            for (std::size_t k = 0; k < m; ++k) {
                const std::uint32_t a = loop[(k + m - 1) % m], b = loop[k], c = loop[(k + 1) % m];
                if (relaxed) {
                    const Vec3 face = (points.positions[b] - points.positions[a]).cross(points.positions[c] - points.positions[a]);
                    if (face.dot(points.normals[a] + points.normals[b] + points.normals[c]) <= 0.0) continue;
                } else {
                    const Vec2 pa = flat(a), pb = flat(b), pc = flat(c);
                    if (orient2d(pa, pb, pc) <= 0.0) continue;
                    bool inside = false;
                    for (std::size_t q = 0; q < m && !inside; ++q) {
                        const std::uint32_t v = loop[q];
                        if (v == a || v == b || v == c) continue;
                        const Vec2 pv = flat(v);
                        inside = orient2d(pa, pb, pv) >= 0.0 && orient2d(pb, pc, pv) >= 0.0 && orient2d(pc, pa, pv) >= 0.0;
                    }
                    if (inside) continue;
                }
                if (!can_add(mesh, a, b, c) || crosses_mesh(points, mesh, a, b, c)) continue;
                const double ab = (points.positions[a] - points.positions[b]).norm();
                const double bc = (points.positions[b] - points.positions[c]).norm();
                const double ca = (points.positions[c] - points.positions[a]).norm();
                const double q = std::max({ab, bc, ca}) / std::min({ab, bc, ca});
                if (q < best) {
                    best = q;
                    pick = k;
                }
            }
        }
        if (pick == m) return false;
        const Triangle tri{loop[(pick + m - 1) % m], loop[pick], loop[(pick + 1) % m]};
        try {
            mesh.add_triangle(tri);
        } catch (const Error&) {
            return false;
        }
        loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(pick));
        if (loop.size() == 2) return true;
    }
    return true;
}

/// Fills small holes and notches along the rim. A hole that cannot be clipped loses its bordering
/// triangles, a pinched vertex loses its smaller fans, and the fill is
/// retried up to `rounds` times.
void fill_holes(const PointSet& points, TriangleMesh& mesh, std::size_t max_edges, int rounds)
{
    for (int round = 0; round <= rounds; ++round) {
        std::vector<std::uint32_t> strip;
        for (const auto& loop : boundary_loops(mesh)) {
            for (const auto& poly : fill_polygons(loop, points.rim)) {
                if (poly.size() > max_edges) continue;
                // The rim of a lone triangle is not a hole.
                if (poly.size() == 3 && mesh.has_triangle(poly[0], poly[1], poly[2])) continue;
                if (fill_loop(points, mesh, poly)) continue;
                for (std::size_t k = 0; k < poly.size(); ++k) {
                    for (std::uint32_t t : mesh.edge_triangles(poly[k], poly[(k + 1) % poly.size()])) strip.push_back(t);
                }
            }
        }
        for (std::uint32_t v = 0; v < mesh.vertex_count(); ++v) {
            auto fans = mesh.fan_components(v);
            if (fans.size() < 2) continue;
            std::stable_sort(fans.begin(), fans.end(),
                             [](const auto& x, const auto& y) { return x.size() > y.size(); });
            for (std::size_t f = 1; f < fans.size(); ++f) strip.insert(strip.end(), fans[f].begin(), fans[f].end());
        }
        std::sort(strip.begin(), strip.end());
        strip.erase(std::unique(strip.begin(), strip.end()), strip.end());
        if (strip.empty() || round == rounds) return;
        mesh.remove_triangles(std::move(strip));
    }
}

} // namespace

TriangulationResult triangulate(const PointSet& points, const TriangulationParams& params, std::uint32_t seed_point)
{
    params.validate();
    const std::size_t n = points.size();
    TriangulationResult result;
    TriangleMesh mesh(points.positions, points.normals);
    if (n < 3) {
        result.incomplete = true;
        result.mesh = std::move(mesh);
        result.mesh.compact();
        return result;
    }
    const auto count = static_cast<std::size_t>(params.neighbor_count);
    InsertionQueue queue(n);

    auto drain = [&](std::size_t k) {
        while (!queue.empty()) {
            const std::uint32_t v = queue.pop();
            if (fan_closed(mesh, v)) continue;
            insert_point(points, mesh, queue, v, k);
        }
    };

    queue.push(std::min<std::uint32_t>(seed_point, static_cast<std::uint32_t>(n - 1)));
    drain(count);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (queue.push(v)) drain(count);
    }

    for (int pass = 0; pass < params.completion_passes; ++pass) {
        const auto defects = find_defects(mesh, points.rim);
        if (defects.empty()) break;
        std::vector<std::uint32_t> redo;
        for (const MeshDefect& d : defects) {
            redo.push_back(d.a);
            redo.push_back(d.b);
        }
        std::sort(redo.begin(), redo.end());
        redo.erase(std::unique(redo.begin(), redo.end()), redo.end());
        InsertionQueue again(n);
        for (std::uint32_t v : redo) again.push(v);
        while (!again.empty()) {
            const std::uint32_t v = again.pop();
            if (fan_closed(mesh, v)) continue;
            InsertionQueue sink(n);
            insert_point(points, mesh, sink, v, 2 * count);
        }
    }

    if (params.max_hole_edges >= 3) fill_holes(points, mesh, static_cast<std::size_t>(params.max_hole_edges), 3);

    const auto defects = find_defects(mesh, points.rim);
    const auto remap = mesh.compact();
    result.source.assign(mesh.vertex_count(), 0);
    result.rim.assign(mesh.vertex_count(), 0);
    for (std::uint32_t old = 0; old < remap.size(); ++old) {
        if (remap[old] == std::numeric_limits<std::uint32_t>::max()) continue;
        result.source[remap[old]] = old;
        result.rim[remap[old]] = points.rim[old];
    }
    for (MeshDefect d : defects) {
        d.a = remap[d.a];
        d.b = remap[d.b];
        result.defects.push_back(d);
    }
    result.incomplete = !result.defects.empty();
    result.mesh = std::move(mesh);
    return result;
}

TriangulationResult triangulate(const ParticleSystem& system, const TriangulationParams& params)
{
    const PointSet points = PointSet::from_particles(system);
    // Seed with the particle nearest the first node of the root branch.
    const Vec3 root = system.tree().branches().front().nodes.front().position;
    const auto seed = points.index.knn(root, 1).front().index;
    return triangulate(points, params, seed);
}

} // namespace tubemesh
