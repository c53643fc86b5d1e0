// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/centerline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace tubemesh {

double CenterlineNode::mean_radius() const
{
    if (radii.empty()) return 0.0;
    return std::accumulate(radii.begin(), radii.end(), 0.0) / static_cast<double>(radii.size());
}

void Branch::rebuild_curve()
{
    std::vector<Vec3> pts;
    pts.reserve(nodes.size());
    for (const auto& n : nodes) pts.push_back(n.position);
    curve = CubicSpline3(pts);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        nodes[i].tangent = curve.derivative(curve.knots()[i]).normalized();
    }
    spacing = curve.length_param() / static_cast<double>(nodes.size() - 1);
}

Branch make_branch(int id, const std::vector<Vec3>& positions,
                   const std::vector<std::vector<double>>& radii, std::optional<Attachment> parent)
{
    if (positions.size() < 2) throw Error(ErrorCode::DegenerateBranch, "branch needs at least 2 nodes");
    if (radii.size() != positions.size()) throw Error(ErrorCode::DegenerateBranch, "radii/node count mismatch");
    Branch b;
    b.id = id;
    b.parent = parent;
    b.nodes.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        b.nodes[i].position = positions[i];
        b.nodes[i].radii = radii[i];
    }
    b.rebuild_curve();
    return b;
}

// ---------------------------------------------------------------------------
// resampling and frames

Branch resample_and_spline(const Branch& branch, double spacing)
{
    if (branch.nodes.size() < 2) throw Error(ErrorCode::DegenerateBranch, "branch needs at least 2 nodes");
    if (!(spacing > 0.0)) throw Error(ErrorCode::DegenerateBranch, "spacing must be positive");

    Branch src = branch;
    if (src.curve.empty()) src.rebuild_curve();
    const CubicSpline3& curve = src.curve;

    const auto& knots = curve.knots();
    // Arclength at every input node.
    std::vector<double> node_arc(knots.size(), 0.0);
    for (std::size_t i = 1; i < knots.size(); ++i) node_arc[i] = node_arc[i - 1] + curve.arclength(knots[i - 1], knots[i]);
    const double total = node_arc.back();
    if (total < spacing) throw Error(ErrorCode::DegenerateBranch, "branch shorter than spacing");

    const auto segments = static_cast<std::size_t>(std::max(1.0, std::round(total / spacing)));
    const double step = total / static_cast<double>(segments);

    // Arclength -> spline parameter by bisection on the monotone arclength map.
    auto param_at = [&](double arc) {
        auto it = std::upper_bound(node_arc.begin(), node_arc.end(), arc);
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - node_arc.begin() - 1, 0)),
                                              knots.size() - 2);
        double lo = knots[i], hi = knots[i + 1];
        const double target = arc - node_arc[i];
        for (int iter = 0; iter < 60; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (curve.arclength(knots[i], mid) < target) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    const std::size_t k = branch.radial_samples();
    std::vector<Vec3> positions;
    std::vector<std::vector<double>> radii;
    positions.reserve(segments + 1);
    radii.reserve(segments + 1);
    for (std::size_t j = 0; j <= segments; ++j) {
        const double arc = j == segments ? total : step * static_cast<double>(j);
        const double t = j == 0 ? knots.front() : (j == segments ? knots.back() : param_at(arc));
        positions.push_back(curve.eval(t));

        auto it = std::upper_bound(node_arc.begin(), node_arc.end(), arc);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - node_arc.begin() - 1, 0));
        i = std::min(i, node_arc.size() - 2);
        const double w = std::clamp((arc - node_arc[i]) / (node_arc[i + 1] - node_arc[i]), 0.0, 1.0);
        std::vector<double> r(k);
        for (std::size_t a = 0; a < k; ++a) {
            r[a] = (1.0 - w) * branch.nodes[i].radii[a] + w * branch.nodes[i + 1].radii[a];
        }
        radii.push_back(std::move(r));
    }
    return make_branch(branch.id, positions, radii, branch.parent);
}

Branch build_rmf_frames(Branch branch, const Vec3& initial_u)
{
    if (branch.nodes.size() < 2) throw Error(ErrorCode::DegenerateBranch, "branch needs at least 2 nodes");
    if (branch.curve.empty()) branch.rebuild_curve();

    const Vec3 t0 = branch.nodes.front().tangent;
    const double n = initial_u.norm();
    if (n == 0.0 || initial_u.cross(t0).norm() < 1e-9 * n) {
        throw Error(ErrorCode::ParallelSeed, "initial u is parallel to the first tangent");
    }
    Vec3 r = (initial_u - initial_u.dot(t0) * t0).normalized();
    branch.nodes.front().u = r;
    branch.nodes.front().v = t0.cross(r);

    // Double reflection (Wang, Juttler, Zheng, Liu 2008).
    for (std::size_t i = 0; i + 1 < branch.nodes.size(); ++i) {
        const CenterlineNode& a = branch.nodes[i];
        CenterlineNode& b = branch.nodes[i + 1];
        const Vec3 v1 = b.position - a.position;
        const double c1 = v1.squaredNorm();
        Vec3 r_next = a.u;
        if (c1 > 0.0) {
            const Vec3 rl = a.u - (2.0 / c1) * v1.dot(a.u) * v1;
            const Vec3 tl = a.tangent - (2.0 / c1) * v1.dot(a.tangent) * v1;
            const Vec3 v2 = b.tangent - tl;
            const double c2 = v2.squaredNorm();
            r_next = c2 > 1e-300 ? Vec3(rl - (2.0 / c2) * v2.dot(rl) * v2) : rl;
        }
        // Re-orthonormalize against round-off.
        r_next = (r_next - r_next.dot(b.tangent) * b.tangent).normalized();
        b.u = r_next;
        b.v = b.tangent.cross(r_next);
    }
    return branch;
}

// ---------------------------------------------------------------------------
// tree

VesselTree::VesselTree(std::vector<Branch> branches) : branches_(std::move(branches))
{
    if (branches_.empty()) return;
    k_ = branches_.front().radial_samples();
    if (k_ < 3) throw Error(ErrorCode::SchemaError, "need at least 3 radial samples per node");

    const std::size_t nb = branches_.size();
    for (std::size_t b = 0; b < nb; ++b) {
        Branch& br = branches_[b];
        if (br.id != static_cast<int>(b)) throw Error(ErrorCode::SchemaError, "branch ids must be 0..n-1 in order");
        if (br.nodes.size() < 2) throw Error(ErrorCode::DegenerateBranch, "branch " + std::to_string(b) + " has fewer than 2 nodes");
        if (br.curve.empty()) br.rebuild_curve();
        for (std::size_t i = 0; i < br.nodes.size(); ++i) {
            const auto& node = br.nodes[i];
            if (node.radii.size() != k_) {
                throw Error(ErrorCode::SchemaError, "branch " + std::to_string(b) + " node " + std::to_string(i) + ": expected " + std::to_string(k_) + " radii");
            }
            for (double r : node.radii) {
                if (!(r > 0.0)) throw Error(ErrorCode::SchemaError, "branch " + std::to_string(b) + " node " + std::to_string(i) + ": radii must be positive");
            }
        }
        if (br.parent) {
            const auto& a = *br.parent;
            if (a.branch < 0 || static_cast<std::size_t>(a.branch) >= nb || a.branch == br.id) {
                throw Error(ErrorCode::SchemaError, "branch " + std::to_string(b) + ": unresolvable parent");
            }
            if (a.node >= branches_[static_cast<std::size_t>(a.branch)].nodes.size()) {
                throw Error(ErrorCode::SchemaError, "branch " + std::to_string(b) + ": parent node out of range");
            }
        }
    }
    // Rooted tree: walking parents from any branch terminates.
    for (std::size_t b = 0; b < nb; ++b) {
        std::size_t steps = 0;
        std::optional<Attachment> cur = branches_[b].parent;
        while (cur) {
            if (++steps > nb) throw Error(ErrorCode::SchemaError, "branch parent links form a cycle");
            cur = branches_[static_cast<std::size_t>(cur->branch)].parent;
        }
    }

    free_start_.assign(nb, true);
    free_end_.assign(nb, true);
    for (const auto& br : branches_) {
        if (br.parent) {
            free_start_[static_cast<std::size_t>(br.id)] = false;
            const Branch& par = branches_[static_cast<std::size_t>(br.parent->branch)];
            if (br.parent->node == 0) free_start_[static_cast<std::size_t>(par.id)] = false;
            if (br.parent->node + 1 == par.nodes.size()) free_end_[static_cast<std::size_t>(par.id)] = false;
        }
    }

    bifurcations_ = detect_bifurcations(*this);
    build_sample_index();
}

void VesselTree::build_sample_index()
{
    std::vector<Vec3> pts;
    branch_first_sample_.clear();
    branch_sample_count_.clear();
    branch_sample_step_.clear();
    max_sample_gap_ = 0.0;
    for (const auto& br : branches_) {
        const double len = br.length();
        const double target = br.spacing / 4.0;
        const auto n = static_cast<std::uint32_t>(std::max(1.0, std::ceil(len / target)));
        const double step = len / n;
        branch_first_sample_.push_back(static_cast<std::uint32_t>(pts.size()));
        branch_sample_count_.push_back(n + 1);
        branch_sample_step_.push_back(step);
        Vec3 prev = br.curve.eval(0.0);
        for (std::uint32_t j = 0; j <= n; ++j) {
            const double s = j == n ? len : step * j;
            const Vec3 p = br.curve.eval(s);
            if (j > 0) max_sample_gap_ = std::max(max_sample_gap_, (p - prev).norm());
            prev = p;
            samples_.push_back({br.id, j, s});
            pts.push_back(p);
        }
    }
    sample_index_.build(pts);
}

namespace {

bool better(double d, int branch, double s, const ClosestPoint& best)
{
    const double tol = 1e-12 * std::max(1.0, best.distance);
    if (d < best.distance - tol) return true;
    if (d > best.distance + tol) return false;
    return branch < best.branch || (branch == best.branch && s < best.s);
}

} // namespace

ClosestPoint VesselTree::closest(const Vec3& p) const
{
    if (branches_.empty()) throw Error(ErrorCode::EmptyTree, "closest point query on empty tree");

    thread_local std::vector<Neighbor> hits;
    sample_index_.knn(p, 1, hits);
    const double d0 = std::sqrt(hits.front().dist2);
    sample_index_.radius_search(p, d0 + max_sample_gap_ * (1.0 + 1e-9) + 1e-12, hits);

    ClosestPoint best;
    best.distance = std::numeric_limits<double>::infinity();
    best.branch = std::numeric_limits<int>::max();

    auto dist_at = [&](const Branch& br, double s) { return (br.curve.eval(s) - p).norm(); };

    for (const Neighbor& h : hits) {
        const Sample& smp = samples_[h.index];
        const Branch& br = branches_[static_cast<std::size_t>(smp.branch)];
        const std::uint32_t count = branch_sample_count_[static_cast<std::size_t>(smp.branch)];
        const double step = branch_sample_step_[static_cast<std::size_t>(smp.branch)];
        const double here = std::sqrt(h.dist2);
        // Only refine around local minima of the sampled distance.
        if (smp.index > 0 && dist_at(br, samples_[h.index - 1].s) < here) continue;
        if (smp.index + 1 < count && dist_at(br, samples_[h.index + 1].s) < here) continue;

        double lo = std::max(0.0, smp.s - step);
        double hi = std::min(br.length(), smp.s + step);
        for (int iter = 0; iter < 20; ++iter) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (dist_at(br, m1) <= dist_at(br, m2)) hi = m2;
            else lo = m1;
        }
        const double bracketed = 0.5 * (lo + hi);
        double s = bracketed;
        // Newton on (c(s) - p) . c'(s) = 0 polishes the bracketed minimum.
        const double lo0 = std::max(0.0, smp.s - step);
        const double hi0 = std::min(br.length(), smp.s + step);
        for (int iter = 0; iter < 8; ++iter) {
            const Vec3 off = br.curve.eval(s) - p;
            const Vec3 d1 = br.curve.derivative(s);
            const double g = off.dot(d1);
            const double gp = d1.squaredNorm() + off.dot(br.curve.second_derivative(s));
            if (!(gp > 0.0)) break;
            const double next = std::clamp(s - g / gp, lo0, hi0);
            if (std::abs(next - s) < 1e-15 * std::max(1.0, std::abs(s))) break;
            s = next;
        }
        double d = dist_at(br, s);
        if (const double db = dist_at(br, bracketed); db < d) {
            d = db;
            s = bracketed;
        }
        // Interval ends cover minima sitting exactly on a branch end.
        for (double e : {lo0, hi0}) {
            const double de = dist_at(br, e);
            if (de < d) {
                d = de;
                s = e;
            }
        }
        if (better(d, br.id, s, best)) {
            best.branch = br.id;
            best.s = s;
            best.distance = d;
        }
    }
    const Branch& br = branches_[static_cast<std::size_t>(best.branch)];
    best.point = br.curve.eval(best.s);
    best.tangent = br.curve.derivative(best.s).normalized();
    return best;
}

LocalFrame VesselTree::frame_at(int branch_id, double s) const
{
    const Branch& br = branch(branch_id);
    s = std::clamp(s, 0.0, br.length());
    const std::size_t i = br.curve.segment(s);
    const double w = (s - br.node_param(i)) / (br.node_param(i + 1) - br.node_param(i));
    LocalFrame f;
    f.t = br.curve.derivative(s).normalized();
    Vec3 u = (1.0 - w) * br.nodes[i].u + w * br.nodes[i + 1].u;
    u -= u.dot(f.t) * f.t;
    f.u = u.normalized();
    f.v = f.t.cross(f.u);
    return f;
}

double VesselTree::radius_at(int branch_id, double s, double theta) const
{
    const Branch& br = branch(branch_id);
    s = std::clamp(s, 0.0, br.length());
    const std::size_t i = br.curve.segment(s);
    const double w = std::clamp((s - br.node_param(i)) / (br.node_param(i + 1) - br.node_param(i)), 0.0, 1.0);

    const double sector = 2.0 * kPi / static_cast<double>(k_);
    double a = std::fmod(theta, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    const double f = a / sector;
    auto j0 = static_cast<std::size_t>(std::floor(f));
    const double frac = f - static_cast<double>(j0);
    j0 %= k_;
    const std::size_t j1 = (j0 + 1) % k_;

    const auto& r0 = br.nodes[i].radii;
    const auto& r1 = br.nodes[i + 1].radii;
    const double ra = (1.0 - frac) * r0[j0] + frac * r0[j1];
    const double rb = (1.0 - frac) * r1[j0] + frac * r1[j1];
    return (1.0 - w) * ra + w * rb;
}

// ---------------------------------------------------------------------------
// queries

ClosestPoint closest_centerline_point(const VesselTree& tree, const Vec3& p) { return tree.closest(p); }

double radius_along_direction(const VesselTree& tree, int branch, double s, const Vec3& dir)
{
    const LocalFrame f = tree.frame_at(branch, s);
    const double a = dir.dot(f.u);
    const double b = dir.dot(f.v);
    const double n = dir.norm();
    if (n == 0.0 || std::hypot(a, b) < 1e-9 * n) {
        throw Error(ErrorCode::AxialDirection, "direction has no component in the cross-section plane");
    }
    return tree.radius_at(branch, s, std::atan2(b, a));
}

double implicit_signed_distance(const VesselTree& tree, const Vec3& p)
{
    const ClosestPoint cp = tree.closest(p);
    try {
        return cp.distance - radius_along_direction(tree, cp.branch, cp.s, p - cp.point);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::AxialDirection) throw;
        return -tree.radius_at(cp.branch, cp.s, 0.0);
    }
}

std::vector<BifurcationInfo> detect_bifurcations(const VesselTree& tree)
{
    std::map<std::pair<int, std::size_t>, std::vector<int>> junctions;
    for (const auto& br : tree.branches()) {
        if (br.parent) junctions[{br.parent->branch, br.parent->node}].push_back(br.id);
    }
    std::vector<BifurcationInfo> out;
    for (const auto& [key, children] : junctions) {
        const Branch& par = tree.branch(key.first);
        const CenterlineNode& node = par.nodes[key.second];
        BifurcationInfo info;
        info.center = node.position;
        info.parent_branch = key.first;
        info.parent_node = key.second;
        double rsum = node.mean_radius();
        if (key.second > 0) info.branch_dirs.push_back(-node.tangent);
        if (key.second + 1 < par.nodes.size()) info.branch_dirs.push_back(node.tangent);
        for (int c : children) {
            const CenterlineNode& first = tree.branch(c).nodes.front();
            info.branch_dirs.push_back(first.tangent);
            rsum += first.mean_radius();
        }
        info.local_radius = rsum / static_cast<double>(1 + children.size());
        out.push_back(std::move(info));
    }
    return out;
}

} // namespace tubemesh
