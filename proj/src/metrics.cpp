// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/metrics.hpp"

#include "parallel.hpp"
#include "tubemesh/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tubemesh {

double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const double ab = (b - a).norm(), bc = (c - b).norm(), ca = (a - c).norm();
    const double lo = std::min({ab, bc, ca});
    if (!(lo > 0.0)) throw Error(ErrorCode::DegenerateTriangle, "zero-length edge");
    return std::max({ab, bc, ca}) / lo;
}

double triangle_quality(const TriangleMesh& mesh, std::size_t t)
{
    const Triangle& tri = mesh.triangles().at(t);
    return triangle_quality(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
}

std::array<std::size_t, kQualityBins> quality_histogram(std::span<const double> qualities)
{
    std::array<std::size_t, kQualityBins> bins{};
    for (double q : qualities) {
        // Bin edges such as 1.2 land in the upper bin.
        const double pos = (q - 1.0) / kQualityBinWidth + 1e-9;
        const auto k = pos <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(pos);
        ++bins[std::min(k, kQualityBins - 1)];
    }
    return bins;
}

DistanceStats mesh_surface_distance(const TriangleMesh& mesh, const VesselTree& tree, unsigned workers)
{
    DistanceStats out;
    const auto& tris = mesh.triangles();
    if (tris.empty()) {
        std::vector<double> d(mesh.vertex_count());
        detail::parallel_for(d.size(), workers, [&](std::size_t i) {
            d[i] = std::abs(implicit_signed_distance(tree, mesh.vertices[i]));
        });
        double sum = 0.0, sum2 = 0.0;
        for (double x : d) {
            sum += x;
            sum2 += x * x;
            out.max = std::max(out.max, x);
        }
        out.samples = d.size();
        if (!d.empty()) {
            out.mean = sum / static_cast<double>(d.size());
            out.rms = std::sqrt(sum2 / static_cast<double>(d.size()));
        }
        return out;
    }

    struct PerTriangle {
        double weight, sum, sum2, max;
    };
    std::vector<PerTriangle> per(tris.size());
    detail::parallel_for(tris.size(), workers, [&](std::size_t t) {
        const Vec3& a = mesh.vertices[tris[t][0]];
        const Vec3& b = mesh.vertices[tris[t][1]];
        const Vec3& c = mesh.vertices[tris[t][2]];
        const Vec3 samples[4] = {a, b, c, (a + b + c) / 3.0};
        PerTriangle r{0.25 * mesh.triangle_area(t), 0.0, 0.0, 0.0};
        for (const Vec3& s : samples) {
            const double d = std::abs(implicit_signed_distance(tree, s));
            r.sum += d;
            r.sum2 += d * d;
            r.max = std::max(r.max, d);
        }
        per[t] = r;
    });
    double wsum = 0.0, sum = 0.0, sum2 = 0.0;
    for (const PerTriangle& r : per) {
        wsum += 4.0 * r.weight;
        sum += r.weight * r.sum;
        sum2 += r.weight * r.sum2;
        out.max = std::max(out.max, r.max);
    }
    out.samples = 4 * tris.size();
    if (wsum > 0.0) {
        out.mean = sum / wsum;
        out.rms = std::sqrt(sum2 / wsum);
    }
    return out;
}

double uniformity_cv(std::span<const Vec3> points)
{
    if (points.size() < 2) throw Error(ErrorCode::InvalidParams, "uniformity needs at least two points");
    const KdTree index(points);
    std::vector<double> d(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto hits = index.knn(points[i], 2);
        double best = std::numeric_limits<double>::infinity();
        for (const Neighbor& h : hits) {
            if (h.index != i) best = std::min(best, std::sqrt(h.dist2));
        }
        d[i] = std::isfinite(best) ? best : 0.0;
    }
    double mean = 0.0;
    for (double x : d) mean += x;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (double x : d) var += (x - mean) * (x - mean);
    var /= static_cast<double>(d.size());
    return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
}

double uniformity_cv(const ParticleSystem& system)
{
    std::vector<Vec3> p;
    p.reserve(system.size());
    for (const Particle& q : system.particles()) p.push_back(q.position);
    return uniformity_cv(p);
}

TriangleMesh structured_reference_mesh(const Branch& branch)
{
    const std::size_t k = branch.radial_samples();
    const std::size_t rings = branch.nodes.size();
    if (rings < 2 || k < 3) throw Error(ErrorCode::DegenerateBranch, "need two nodes and three radial samples");
    std::vector<Vec3> v, n;
    for (const CenterlineNode& node : branch.nodes) {
        for (std::size_t j = 0; j < k; ++j) {
            const double theta = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(k);
            const Vec3 dir = std::cos(theta) * node.u + std::sin(theta) * node.v;
            v.push_back(node.position + node.radii[j] * dir);
            n.push_back(dir);
        }
    }
    TriangleMesh mesh(std::move(v), std::move(n));
    auto at = [k](std::size_t ring, std::size_t j) { return static_cast<std::uint32_t>(ring * k + j % k); };
    for (std::size_t i = 0; i + 1 < rings; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            mesh.add_triangle({at(i, j), at(i, j + 1), at(i + 1, j)});
            mesh.add_triangle({at(i, j + 1), at(i + 1, j + 1), at(i + 1, j)});
        }
    }
    return mesh;
}

TriangleMesh structured_reference_mesh(const VesselTree& tree)
{
    if (tree.empty()) throw Error(ErrorCode::EmptyTree, "no branches");
    if (tree.branches().size() != 1 || !tree.bifurcations().empty()) {
        throw Error(ErrorCode::HasBifurcation, "structured reference needs a single branch");
    }
    return structured_reference_mesh(tree.branches().front());
}

double tree_mean_radius(const VesselTree& tree)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const Branch& b : tree.branches()) {
        for (const CenterlineNode& node : b.nodes) {
            sum += node.mean_radius();
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

MeshReport build_report(const TriangleMesh& mesh, const VesselTree& tree, unsigned workers)
{
    MeshReport rep;
    rep.qualities.reserve(mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) rep.qualities.push_back(triangle_quality(mesh, t));
    rep.histogram = quality_histogram(rep.qualities);
    if (!rep.qualities.empty()) {
        double sum = 0.0;
        std::size_t good = 0;
        for (double q : rep.qualities) {
            sum += q;
            good += q <= 2.5 ? 1 : 0;
        }
        rep.mean_quality = sum / static_cast<double>(rep.qualities.size());
        rep.fraction_quality_le_2_5 = static_cast<double>(good) / static_cast<double>(rep.qualities.size());
    }
    rep.distance = mesh_surface_distance(mesh, tree, workers);
    rep.mean_radius = tree_mean_radius(tree);
    rep.topology = topology_check(mesh, tree);
    if (mesh.vertex_count() >= 2) rep.uniformity_cv = uniformity_cv(mesh.vertices);
    return rep;
}

} // namespace tubemesh
