// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/common.hpp"
#include "tubemesh/kdtree.hpp"
#include "tubemesh/spline.hpp"

#include <optional>
#include <vector>

namespace tubemesh {

/// One centerline sample with its cross-section frame and lumen profile.
/// Radius sample j lies at angle 2*pi*j/k in the (u, v) plane, measured from
/// u toward v.
struct CenterlineNode {
    Vec3 position = Vec3::Zero();
    Vec3 tangent = Vec3::UnitZ();
    Vec3 u = Vec3::UnitX();
    Vec3 v = Vec3::UnitY();
    std::vector<double> radii;

    double mean_radius() const;
};

struct Attachment {
    int branch = 0;
    std::size_t node = 0;

    friend bool operator==(const Attachment&, const Attachment&) = default;
};

/// A centerline branch: ordered nodes on a natural cubic spline. The spline
/// parameter `s` (chord length through the nodes, mm) is the branch's
/// arclength coordinate for every query in this module.
struct Branch {
    int id = 0;
    std::vector<CenterlineNode> nodes;
    std::optional<Attachment> parent;
    double spacing = 0.0;
    CubicSpline3 curve;

    /// Rebuilds the spline through node positions, node tangents from it and
    /// the mean node spacing. Frames are left untouched.
    void rebuild_curve();

    double length() const { return curve.length_param(); }
    double node_param(std::size_t i) const { return curve.knots()[i]; }
    std::size_t radial_samples() const { return nodes.empty() ? 0 : nodes.front().radii.size(); }
};

/// Makes a branch from positions and per-node radii (frames unset).
Branch make_branch(int id, const std::vector<Vec3>& positions,
                   const std::vector<std::vector<double>>& radii,
                   std::optional<Attachment> parent = std::nullopt);

struct BifurcationInfo {
    Vec3 center = Vec3::Zero();
    std::vector<Vec3> branch_dirs;
    double local_radius = 0.0;
    int parent_branch = 0;
    std::size_t parent_node = 0;
};

struct ClosestPoint {
    int branch = 0;
    double s = 0.0;
    Vec3 point = Vec3::Zero();
    Vec3 tangent = Vec3::UnitZ();
    double distance = 0.0;
};

struct LocalFrame {
    Vec3 t, u, v;
};

/// Immutable centerline tree. Safe for concurrent read-only queries.
class VesselTree {
public:
    VesselTree() = default;
    explicit VesselTree(std::vector<Branch> branches);

    bool empty() const { return branches_.empty(); }
    const std::vector<Branch>& branches() const { return branches_; }
    const Branch& branch(int id) const { return branches_.at(static_cast<std::size_t>(id)); }
    const std::vector<BifurcationInfo>& bifurcations() const { return bifurcations_; }
    std::size_t radial_samples() const { return k_; }

    /// Whether the branch start (s = 0) / end (s = length) is a free vessel end.
    bool free_start(int id) const { return free_start_.at(static_cast<std::size_t>(id)); }
    bool free_end(int id) const { return free_end_.at(static_cast<std::size_t>(id)); }

    ClosestPoint closest(const Vec3& p) const;
    LocalFrame frame_at(int branch, double s) const;
    double radius_at(int branch, double s, double theta) const;

private:
    void build_sample_index();

    std::vector<Branch> branches_;
    std::vector<BifurcationInfo> bifurcations_;
    std::vector<bool> free_start_, free_end_;
    std::size_t k_ = 0;

    struct Sample {
        int branch;
        std::uint32_t index; // sample index within branch
        double s;
    };
    std::vector<Sample> samples_;
    std::vector<std::uint32_t> branch_first_sample_;
    std::vector<std::uint32_t> branch_sample_count_;
    std::vector<double> branch_sample_step_;
    KdTree sample_index_;
    double max_sample_gap_ = 0.0;
};

/// Resamples a branch uniformly in arclength on the spline through its nodes.
/// Radii of new nodes are linearly interpolated in arclength per angular index.
Branch resample_and_spline(const Branch& branch, double spacing);

/// Assigns rotation-minimizing frames by double reflection, seeded with
/// `initial_u` orthogonalized against the first tangent.
Branch build_rmf_frames(Branch branch, const Vec3& initial_u);

ClosestPoint closest_centerline_point(const VesselTree& tree, const Vec3& p);

/// Lumen radius toward `dir`: bilinear in angle and arclength.
double radius_along_direction(const VesselTree& tree, int branch, double s, const Vec3& dir);

/// d - R; negative inside the lumen.
double implicit_signed_distance(const VesselTree& tree, const Vec3& p);

std::vector<BifurcationInfo> detect_bifurcations(const VesselTree& tree);

} // namespace tubemesh
