// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/mesh.hpp"

#include <algorithm>
#include <limits>

namespace tubemesh {

TriangleMesh::TriangleMesh(std::vector<Vec3> v, std::vector<Vec3> n)
    : vertices(std::move(v)), normals(std::move(n)), vertex_tris_(vertices.size())
{
}

std::uint32_t TriangleMesh::add_triangle(const Triangle& t)
{
    const std::size_t nv = vertices.size();
    if (t[0] >= nv || t[1] >= nv || t[2] >= nv) throw Error(ErrorCode::DegenerateTriangle, "vertex index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw Error(ErrorCode::DegenerateTriangle, "repeated vertex");
    const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    if (!(0.5 * n.norm() > 1e-12)) throw Error(ErrorCode::DegenerateTriangle, "zero-area triangle");

    if (vertex_tris_.size() < nv) vertex_tris_.resize(nv);
    const auto id = static_cast<std::uint32_t>(triangles_.size());
    triangles_.push_back(t);
    for (int e = 0; e < 3; ++e) {
        const std::uint32_t a = t[e], b = t[(e + 1) % 3];
        edges_[edge_key(a, b)].push_back(id);
        directed_[directed_key(a, b)] = id;
        vertex_tris_[a].push_back(id);
    }
    return id;
}

const std::vector<std::uint32_t>& TriangleMesh::edge_triangles(std::uint32_t a, std::uint32_t b) const
{
    static const std::vector<std::uint32_t> none;
    const auto it = edges_.find(edge_key(a, b));
    return it == edges_.end() ? none : it->second;
}

bool TriangleMesh::has_directed_edge(std::uint32_t from, std::uint32_t to) const
{
    return directed_.count(directed_key(from, to)) != 0;
}

bool TriangleMesh::has_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c) const
{
    for (std::uint32_t t : edge_triangles(a, b)) {
        const Triangle& tri = triangles_[t];
        if (tri[0] == c || tri[1] == c || tri[2] == c) return true;
    }
    return false;
}

std::vector<std::vector<std::uint32_t>> TriangleMesh::fan_components(std::uint32_t v) const
{
    const auto& tris = vertex_tris_[v];
    std::vector<int> group(tris.size(), -1);
    std::vector<std::vector<std::uint32_t>> out;
    for (std::size_t seed = 0; seed < tris.size(); ++seed) {
        if (group[seed] >= 0) continue;
        const int g = static_cast<int>(out.size());
        out.emplace_back();
        std::vector<std::size_t> stack{seed};
        group[seed] = g;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            out[g].push_back(tris[cur]);
            for (std::uint32_t w : triangles_[tris[cur]]) {
                if (w == v) continue;
                for (std::uint32_t t : edge_triangles(v, w)) {
                    const auto it = std::find(tris.begin(), tris.end(), t);
                    const auto k = static_cast<std::size_t>(it - tris.begin());
                    if (group[k] < 0) {
                        group[k] = g;
                        stack.push_back(k);
                    }
                }
            }
        }
        std::sort(out[g].begin(), out[g].end());
    }
    return out;
}

double TriangleMesh::triangle_area(std::size_t t) const
{
    return 0.5 * triangle_normal(t).norm();
}

Vec3 TriangleMesh::triangle_normal(std::size_t t) const
{
    const Triangle& tri = triangles_[t];
    return (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
}

void TriangleMesh::remove_triangles(std::vector<std::uint32_t> ids)
{
    std::sort(ids.begin(), ids.end());
    std::vector<Triangle> old = std::move(triangles_);
    *this = TriangleMesh(std::move(vertices), std::move(normals));
    for (std::uint32_t t = 0; t < old.size(); ++t) {
        if (!std::binary_search(ids.begin(), ids.end(), t)) add_triangle(old[t]);
    }
}

std::vector<std::uint32_t> TriangleMesh::compact()
{
    constexpr auto kDropped = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> remap(vertices.size(), kDropped);
    for (const Triangle& t : triangles_) {
        for (std::uint32_t v : t) remap[v] = 0;
    }
    std::vector<Vec3> nv, nn;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (remap[i] == kDropped) continue;
        remap[i] = static_cast<std::uint32_t>(nv.size());
        nv.push_back(vertices[i]);
        if (!normals.empty()) nn.push_back(normals[i]);
    }
    std::vector<Triangle> old = std::move(triangles_);
    *this = TriangleMesh(std::move(nv), std::move(nn));
    for (Triangle t : old) {
        for (auto& v : t) v = remap[v];
        add_triangle(t);
    }
    return remap;
}

} // namespace tubemesh
