// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tubemesh {

struct Neighbor {
    std::uint32_t index;
    double dist2;

    friend bool operator<(const Neighbor& a, const Neighbor& b)
    {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
};

/// Static 3D k-d tree over a point array. Results are ordered by
/// (squared distance, index) so equal-distance ties are deterministic.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::span<const Vec3> points) { build(points); }

    void build(std::span<const Vec3> points);
    std::size_t size() const { return points_.size(); }
    const Vec3& point(std::size_t i) const { return points_[i]; }

    /// k nearest points to q, nearest first. Fewer if the tree is smaller.
    void knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out) const;
    std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const
    {
        std::vector<Neighbor> out;
        knn(q, k, out);
        return out;
    }

    /// All points with |p - q| <= radius, nearest first.
    void radius_search(const Vec3& q, double radius, std::vector<Neighbor>& out) const;

private:
    struct Node {
        std::uint32_t begin, end; // range into order_
        std::int32_t left = -1, right = -1;
        int axis = -1; // -1 for leaves
        double split = 0.0;
        Eigen::AlignedBox3d box;
    };

    std::int32_t build_node(std::uint32_t begin, std::uint32_t end);
    void knn_node(std::int32_t node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const;
    void radius_node(std::int32_t node, const Vec3& q, double r2, std::vector<Neighbor>& out) const;

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Vec3> packed_; // points_ in order_ sequence
    std::vector<Node> nodes_;
};

} // namespace tubemesh
