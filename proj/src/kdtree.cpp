// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace tubemesh {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

void KdTree::build(std::span<const Vec3> points)
{
    points_.assign(points.begin(), points.end());
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.clear();
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / kLeafSize + 1);
        build_node(0, static_cast<std::uint32_t>(points_.size()));
    }
    packed_.resize(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) packed_[i] = points_[order_[i]];
}

std::int32_t KdTree::build_node(std::uint32_t begin, std::uint32_t end)
{
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end, -1, -1, -1, 0.0, {}});
    Eigen::AlignedBox3d box;
    for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
    nodes_[id].box = box;
    if (end - begin <= kLeafSize) return id;

    Eigen::Index axis = 0;
    box.sizes().maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    const int a = static_cast<int>(axis);
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t l, std::uint32_t r) {
                         const double pl = points_[l][a], pr = points_[r][a];
                         return pl < pr || (pl == pr && l < r);
                     });
    nodes_[id].axis = a;
    nodes_[id].split = points_[order_[mid]][a];
    const std::int32_t left = build_node(begin, mid);
    const std::int32_t right = build_node(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out) const
{
    out.clear();
    if (nodes_.empty() || k == 0) return;
    out.reserve(k + 1);
    knn_node(0, q, k, out);
    std::sort_heap(out.begin(), out.end());
}

void KdTree::knn_node(std::int32_t id, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const
{
    const Node& node = nodes_[id];
    if (heap.size() == k && node.box.squaredExteriorDistance(q) > heap.front().dist2) return;
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const Neighbor cand{order_[i], (packed_[i] - q).squaredNorm()};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end());
            } else if (cand < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    const bool go_left = q[node.axis] < node.split;
    knn_node(go_left ? node.left : node.right, q, k, heap);
    knn_node(go_left ? node.right : node.left, q, k, heap);
}

void KdTree::radius_search(const Vec3& q, double radius, std::vector<Neighbor>& out) const
{
    out.clear();
    if (nodes_.empty()) return;
    radius_node(0, q, radius * radius, out);
    std::sort(out.begin(), out.end());
}

void KdTree::radius_node(std::int32_t id, const Vec3& q, double r2, std::vector<Neighbor>& out) const
{
    const Node& node = nodes_[id];
    if (node.box.squaredExteriorDistance(q) > r2) return;
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const double d2 = (packed_[i] - q).squaredNorm();
            if (d2 <= r2) out.push_back({order_[i], d2});
        }
        return;
    }
    radius_node(node.left, q, r2, out);
    radius_node(node.right, q, r2, out);
}

} // namespace tubemesh
