// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/common.hpp"

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace tubemesh {

using Triangle = std::array<std::uint32_t, 3>;

inline std::uint64_t edge_key(std::uint32_t a, std::uint32_t b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

inline std::uint64_t directed_key(std::uint32_t from, std::uint32_t to)
{
    return (static_cast<std::uint64_t>(from) << 32) | to;
}

/// Indexed triangle mesh with an undirected edge -> triangles map.
class TriangleMesh {
public:
    TriangleMesh() = default;
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Vec3> normals);

    std::vector<Vec3> vertices;
    std::vector<Vec3> normals; // empty or one per vertex

    const std::vector<Triangle>& triangles() const { return triangles_; }
    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    /// Appends a triangle. Throws DegenerateTriangle for repeated indices,
    /// out-of-range indices or area <= 1e-12.
    std::uint32_t add_triangle(const Triangle& t);

    const std::vector<std::uint32_t>& edge_triangles(std::uint32_t a, std::uint32_t b) const;
    const std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>& edge_map() const { return edges_; }
    const std::vector<std::uint32_t>& vertex_triangles(std::uint32_t v) const { return vertex_tris_[v]; }
    bool has_directed_edge(std::uint32_t from, std::uint32_t to) const;
    bool has_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c) const;

    /// Triangles around v grouped by edge-connectivity through v. More than
    /// one group marks a pinched (non-manifold) vertex.
    std::vector<std::vector<std::uint32_t>> fan_components(std::uint32_t v) const;

    double triangle_area(std::size_t t) const;
    Vec3 triangle_normal(std::size_t t) const; // unnormalized, right-handed

    /// Removes the listed triangles; remaining triangles keep their order.
    void remove_triangles(std::vector<std::uint32_t> ids);

    /// Drops vertices that no triangle references; returns old -> new index
    /// (UINT32_MAX for dropped vertices).
    std::vector<std::uint32_t> compact();

private:
    std::vector<Triangle> triangles_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> edges_;
    std::unordered_map<std::uint64_t, std::uint32_t> directed_;
    std::vector<std::vector<std::uint32_t>> vertex_tris_;
};

} // namespace tubemesh
