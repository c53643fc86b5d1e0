// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/centerline.hpp"
#include "tubemesh/mesh.hpp"
#include "tubemesh/triangulation.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace tubemesh {

class ParticleSystem;

/// Longest over shortest edge. Throws DegenerateTriangle for a zero-length edge.
double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c);
double triangle_quality(const TriangleMesh& mesh, std::size_t t);

/// Bins of width 0.1 over [1, 5) plus one overflow bin for quality >= 5.
constexpr std::size_t kQualityBins = 41;
constexpr double kQualityBinWidth = 0.1;
std::array<std::size_t, kQualityBins> quality_histogram(std::span<const double> qualities);

struct DistanceStats {
    double mean = 0.0;
    double max = 0.0;
    double rms = 0.0;
    std::size_t samples = 0;
};

/// |implicit signed distance| sampled at every triangle's vertices and
/// barycenter, each sample weighted by a quarter of the triangle area. A mesh
/// without triangles is sampled at its vertices with equal weights.
DistanceStats mesh_surface_distance(const TriangleMesh& mesh, const VesselTree& tree, unsigned workers = 1);

/// Coefficient of variation of nearest-neighbor distances.
double uniformity_cv(std::span<const Vec3> points);
double uniformity_cv(const ParticleSystem& system);

/// Ring-per-node mesh of one branch straight from its radii, outward oriented.
TriangleMesh structured_reference_mesh(const Branch& branch);
/// Throws HasBifurcation unless the tree is a single branch.
TriangleMesh structured_reference_mesh(const VesselTree& tree);

struct MeshReport {
    std::vector<double> qualities;
    std::array<std::size_t, kQualityBins> histogram{};
    double mean_quality = 0.0;
    double fraction_quality_le_2_5 = 0.0;
    DistanceStats distance;
    double mean_radius = 0.0; // mean node radius of the tree
    std::optional<double> uniformity_cv;
    TopologyReport topology;
    bool converged = true;
    bool incomplete = false;
    int iterations = 0;
};

MeshReport build_report(const TriangleMesh& mesh, const VesselTree& tree, unsigned workers = 1);

/// Mean of all node mean radii.
double tree_mean_radius(const VesselTree& tree);

} // namespace tubemesh
