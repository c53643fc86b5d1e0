// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/centerline.hpp"
#include "tubemesh/kdtree.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace tubemesh {

struct Particle {
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::UnitX();
    double radius = 0.0; // balloon radius, mm
    ClosestPoint closest;
    bool on_end_plane = false; // clamped to a free vessel end
};

/// How bifurcation normals pick the in-plane pivot point.
enum class PivotRule {
    /// Intersection of the bisector with the in-plane normal line of the
    /// nearer centerline ray (through its foot point and p's projection).
    NearRayNormal,
    /// Orthogonal projection of p onto the bisector line.
    BisectorProjection,
};

struct RelaxationParams {
    double alpha = 0.5;
    double mu = 20.0;
    double mass = 1.0;
    std::optional<double> step_scale; // mm per unit force; default 0.02 * seed spacing
    double eta = 0.01;
    std::optional<double> dr_max; // default +0.02 * seed spacing
    std::optional<double> dr_min; // default -0.04 * seed spacing
    std::optional<double> max_move; // per-iteration displacement cap; default 0.1 * seed spacing
    double term_eps = 0.05;
    /// Convergence also needs |mean balloon radius change| below this
    /// fraction of dr_max.
    double settle_fraction = 0.25;
    int max_iters = 200;
    int neighbor_count = 25;
    unsigned workers = 1;
    PivotRule pivot = PivotRule::NearRayNormal;
    double mid_angle_deg = 45.0;

    /// Throws InvalidParams when a value is out of range.
    void validate() const;
};

/// Fully numeric parameters for one system.
struct ResolvedParams {
    double alpha, mu, mass, step_scale, eta, dr_max, dr_min, r_floor, r_ceil, max_move, term_eps;
    int max_iters;
    std::size_t neighbor_count;
    unsigned workers;
    PivotRule pivot;
    double mid_angle_deg;
};

class ParticleSystem {
public:
    ParticleSystem() = default;
    ParticleSystem(const VesselTree& tree, std::vector<Particle> particles, double seed_spacing, double initial_radius);

    const VesselTree& tree() const { return *tree_; }
    std::vector<Particle>& particles() { return particles_; }
    const std::vector<Particle>& particles() const { return particles_; }
    std::size_t size() const { return particles_.size(); }
    const KdTree& index() const { return index_; }
    double seed_spacing() const { return seed_spacing_; }
    double initial_radius() const { return initial_radius_; }
    int iteration() const { return iteration_; }
    void advance_iteration() { ++iteration_; }

    ResolvedParams resolve(const RelaxationParams& params) const;

    /// Recomputes closest points, clamps particles past free vessel ends onto
    /// the end plane and rebuilds the spatial index.
    void refresh(unsigned workers = 1);
    /// Recomputes normals at the current positions.
    void update_normals(const RelaxationParams& params);
    void reindex();

private:
    const VesselTree* tree_ = nullptr;
    std::vector<Particle> particles_;
    KdTree index_;
    double seed_spacing_ = 0.0;
    double initial_radius_ = 0.0;
    int iteration_ = 0;
};

/// Seeds round(density * 2*pi*mean_R * spacing) particles per node, scattered
/// +-10% around the lumen wall at random angles.
ParticleSystem seed_particles(const VesselTree& tree, double density, std::uint64_t seed);

/// Lennard-Jones style scalar (a*x + 1 - a)^-6 - (a*x + 1 - a)^-3.
double imf_scalar(double ratio, double alpha);

/// Signed centerline force along the particle normal (positive outward).
Vec3 centerline_force(const Particle& particle, const VesselTree& tree, double alpha,
                      PivotRule pivot = PivotRule::NearRayNormal);

struct NormalInfo {
    Vec3 normal;
    bool high_curvature = false;
    bool fallback = false;
};

/// Radial normal, or the bifurcation construction for particles in the
/// high-curvature region of a junction.
NormalInfo particle_normal_info(const Vec3& position, const ClosestPoint& closest, const VesselTree& tree,
                                PivotRule pivot = PivotRule::NearRayNormal, double mid_angle_deg = 45.0);
Vec3 particle_normal(const Particle& particle, const VesselTree& tree, PivotRule pivot = PivotRule::NearRayNormal);

double repel_magnitude(double distance, double r_i, double r_j, double alpha);

/// Force on particle i from j, projected into the tangent plane of n_i.
/// `jitter_key` fixes the direction for coincident particles.
Vec3 repel_force(const Particle& pi, const Particle& pj, double alpha, std::size_t jitter_key = 0);

struct NeighborSets {
    std::vector<std::uint32_t> nearest; // M nearest, nearest first
    std::vector<std::uint32_t> force;   // subset inside the interaction cutoff
};

NeighborSets neighbor_set(const ParticleSystem& system, std::size_t i, std::size_t neighbor_count);

/// sum |F| - |sum F|; never negative.
double compress_magnitude(std::span<const Vec3> forces);
double compress_magnitude(const ParticleSystem& system, std::size_t i, const RelaxationParams& params);

/// Compression of an ideal hexagonal packing: six neighbors at the cutoff.
double ideal_compress();

/// New balloon radius after one feedback update.
double update_balloon_radius(double radius, double compress, const ResolvedParams& params);

struct StepStats {
    int iteration = 0;
    double mean_displacement = 0.0;
    double max_displacement = 0.0;
    double mean_radius = 0.0;
    double mean_radius_change = 0.0; // signed
};

StepStats relax_step(ParticleSystem& system, const RelaxationParams& params);

struct RelaxResult {
    int iterations = 0;
    bool converged = false;
    std::vector<StepStats> history;
};

RelaxResult relax(ParticleSystem& system, const RelaxationParams& params,
                  const std::function<void(const StepStats&)>& on_step = {});

} // namespace tubemesh
