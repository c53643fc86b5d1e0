// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/centerline.hpp"
#include "tubemesh/kdtree.hpp"
#include "tubemesh/mesh.hpp"

#include <string>
#include <vector>

namespace tubemesh {

class ParticleSystem;

/// Oriented points to triangulate. `rim` marks points lying on a free vessel
/// end; boundary edges between two rim points are expected.
struct PointSet {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<char> rim;
    KdTree index;

    PointSet() = default;
    PointSet(std::vector<Vec3> positions, std::vector<Vec3> normals, std::vector<char> rim = {});
    static PointSet from_particles(const ParticleSystem& system);

    std::size_t size() const { return positions.size(); }
};

struct TriangulationParams {
    int neighbor_count = 25;
    int completion_passes = 3;
    int max_hole_edges = 12; // ear-clip closed holes up to this size; below 3 disables

    void validate() const;
};

/// Local tangent-plane view around one point. members[0] is the center.
struct Neighborhood2D {
    std::uint32_t center = 0;
    std::vector<std::uint32_t> members;
    std::vector<Vec2> coords;
    std::vector<Triangle> existing; // T_exist in local indices
    double eps = 0.0;               // length tolerance, 1e-9 * diameter
};

/// Projects the `count` nearest points plus the mesh neighbors of i onto the
/// plane through p_i with normal n_i.
Neighborhood2D project_neighborhood(const PointSet& points, const TriangleMesh& mesh, std::uint32_t i,
                                    std::size_t count);

/// Whether the local triangle (a, b, c) crosses or overlaps any triangle of T_exist.
bool blocked_by_existing(const Neighborhood2D& nbhd, std::uint32_t a, std::uint32_t b, std::uint32_t c);

/// Constrained empty-circumcircle test for (center, k1, k2), local indices.
bool candidate_valid(const Neighborhood2D& nbhd, std::uint32_t k1, std::uint32_t k2);

/// FIFO of point indices; each point is enqueued at most once.
struct InsertionQueue {
    std::vector<std::uint32_t> order;
    std::vector<char> queued;
    std::size_t head = 0;

    explicit InsertionQueue(std::size_t n = 0) : queued(n, 0) {}
    bool push(std::uint32_t v);
    bool empty() const { return head >= order.size(); }
    std::uint32_t pop() { return order[head++]; }
};

/// Processes one point; returns the accepted triangles (global indices).
std::vector<Triangle> insert_point(const PointSet& points, TriangleMesh& mesh, InsertionQueue& queue,
                                   std::uint32_t i, std::size_t count);

struct MeshDefect {
    std::uint32_t a = 0, b = 0;
    std::string kind;
};

struct TriangulationResult {
    TriangleMesh mesh;
    std::vector<std::uint32_t> source; // mesh vertex -> input point
    std::vector<char> rim;             // per mesh vertex
    bool incomplete = false;
    std::vector<MeshDefect> defects; // in mesh vertex indices
};

/// Seeds with `seed_point`, drains the queue, re-seeds unreached points,
/// runs the completion passes over open non-rim edges, then fills small holes.
TriangulationResult triangulate(const PointSet& points, const TriangulationParams& params,
                                std::uint32_t seed_point = 0);
TriangulationResult triangulate(const ParticleSystem& system, const TriangulationParams& params);

struct TopologyReport {
    std::size_t vertices = 0, edges = 0, triangles = 0;
    long euler = 0;
    std::size_t boundary_edges = 0;
    std::size_t nonmanifold_edges = 0;
    std::size_t pinched_vertices = 0;
    std::size_t boundary_loops = 0;
    std::vector<std::size_t> loop_lengths;
    bool loops_closed = true;
    std::size_t tree_endpoints = 0;
    std::size_t self_intersections = 0;
    bool orientation_consistent = true;

    bool manifold() const { return nonmanifold_edges == 0 && pinched_vertices == 0 && loops_closed; }
    bool watertight() const
    {
        return manifold() && self_intersections == 0 && orientation_consistent && boundary_loops == tree_endpoints;
    }
};

TopologyReport topology_check(const TriangleMesh& mesh, std::size_t tree_endpoints = 0);
TopologyReport topology_check(const TriangleMesh& mesh, const VesselTree& tree);

/// Number of free vessel ends of a tree.
std::size_t count_free_ends(const VesselTree& tree);

/// Exact-ish 3D triangle-triangle intersection for triangles sharing no vertex.
bool triangles_intersect_3d(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0, const Vec3& b1,
                            const Vec3& b2);

} // namespace tubemesh
