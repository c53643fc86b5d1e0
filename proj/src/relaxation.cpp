// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/relaxation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tubemesh {

void RelaxationParams::validate() const
{
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidParams, m); };
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0, 1)");
    if (!(mu >= 0.0)) fail("mu must be non-negative");
    if (!(mass > 0.0)) fail("mass must be positive");
    if (step_scale && !(*step_scale > 0.0)) fail("step_scale must be positive");
    if (!(eta > 0.0)) fail("eta must be positive");
    if (dr_max && !(*dr_max > 0.0)) fail("dr_max must be positive");
    if (dr_min && !(*dr_min < 0.0)) fail("dr_min must be negative");
    if (max_move && !(*max_move > 0.0)) fail("max_move must be positive");
    if (!(term_eps > 0.0)) fail("term_eps must be positive");
    if (!(settle_fraction >= 0.0)) fail("settle_fraction must be non-negative");
    if (max_iters < 0) fail("max_iters must be non-negative");
    if (neighbor_count < 6) fail("neighbor_count must be at least 6");
    if (workers < 1) fail("workers must be at least 1");
    if (!(mid_angle_deg > 0.0 && mid_angle_deg < 90.0)) fail("mid angle must be in (0, 90)");
}

ParticleSystem::ParticleSystem(const VesselTree& tree, std::vector<Particle> particles, double seed_spacing,
                               double initial_radius)
    : tree_(&tree), particles_(std::move(particles)), seed_spacing_(seed_spacing), initial_radius_(initial_radius)
{
    if (tree.empty()) throw Error(ErrorCode::EmptyTree, "particle system needs a centerline");
    if (particles_.size() < 4) throw Error(ErrorCode::InvalidParams, "particle system needs at least 4 particles");
    refresh();
}

ResolvedParams ParticleSystem::resolve(const RelaxationParams& p) const
{
    p.validate();
    ResolvedParams r{};
    r.alpha = p.alpha;
    r.mu = p.mu;
    r.mass = p.mass;
    r.step_scale = p.step_scale.value_or(0.02 * seed_spacing_);
    r.eta = p.eta;
    r.dr_max = p.dr_max.value_or(0.02 * seed_spacing_);
    r.dr_min = p.dr_min.value_or(-0.04 * seed_spacing_);
    r.r_floor = 0.1 * initial_radius_;
    r.r_ceil = 3.0 * initial_radius_;
    r.max_move = p.max_move.value_or(0.1 * seed_spacing_);
    r.term_eps = p.term_eps;
    r.max_iters = p.max_iters;
    r.neighbor_count = static_cast<std::size_t>(p.neighbor_count);
    r.workers = p.workers;
    r.pivot = p.pivot;
    r.mid_angle_deg = p.mid_angle_deg;
    return r;
}

namespace {

/// Projects particles that passed a free vessel end back onto the end plane.
void clamp_to_end(Particle& pt, const VesselTree& tree)
{
    pt.on_end_plane = false;
    for (int pass = 0; pass < 2; ++pass) {
        const ClosestPoint& cp = pt.closest;
        const double len = tree.branch(cp.branch).length();
        const bool at_start = cp.s <= 0.0 && tree.free_start(cp.branch);
        const bool at_end = cp.s >= len && tree.free_end(cp.branch);
        if (!at_start && !at_end) return;
        const double axial = (pt.position - cp.point).dot(cp.tangent);
        if ((at_start && axial < 0.0) || (at_end && axial > 0.0)) {
            pt.position -= axial * cp.tangent;
            pt.closest = tree.closest(pt.position);
        }
        if (std::abs((pt.position - pt.closest.point).dot(pt.closest.tangent)) <= 1e-9 * std::max(1.0, len)) {
            pt.on_end_plane = (pt.closest.s <= 0.0 && tree.free_start(pt.closest.branch)) ||
                              (pt.closest.s >= tree.branch(pt.closest.branch).length() &&
                               tree.free_end(pt.closest.branch));
        }
        if (pass == 0 && pt.closest.branch == cp.branch) return;
    }
}

} // namespace

void ParticleSystem::refresh(unsigned workers)
{
    detail::parallel_for(particles_.size(), workers, [&](std::size_t i) {
        Particle& pt = particles_[i];
        pt.closest = tree_->closest(pt.position);
        clamp_to_end(pt, *tree_);
    });
    reindex();
}

void ParticleSystem::update_normals(const RelaxationParams& params)
{
    detail::parallel_for(particles_.size(), params.workers, [&](std::size_t i) {
        Particle& pt = particles_[i];
        pt.normal = particle_normal_info(pt.position, pt.closest, *tree_, params.pivot, params.mid_angle_deg).normal;
    });
}

void ParticleSystem::reindex()
{
    std::vector<Vec3> pts;
    pts.reserve(particles_.size());
    for (const auto& p : particles_) pts.push_back(p.position);
    index_.build(pts);
}

ParticleSystem seed_particles(const VesselTree& tree, double density, std::uint64_t seed)
{
    if (tree.empty()) throw Error(ErrorCode::EmptyTree, "cannot seed particles on an empty tree");
    if (!(density > 0.0)) throw Error(ErrorCode::InvalidParams, "density must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    std::uniform_real_distribution<double> axial(-0.5, 0.5);
    const double spacing = 1.0 / std::sqrt(density);
    const double r0 = 0.5 * spacing;

    std::vector<Particle> particles;
    for (const Branch& br : tree.branches()) {
        for (std::size_t n = 0; n < br.nodes.size(); ++n) {
            const double count = std::round(density * 2.0 * kPi * br.nodes[n].mean_radius() * br.spacing);
            const double s = br.node_param(n);
            for (int c = 0; c < static_cast<int>(count); ++c) {
                const double theta = angle(rng);
                const double scale = 1.0 + jitter(rng);
                double sa = s + br.spacing * axial(rng);
                if (sa < 0.0) sa = -sa;
                if (sa > br.length()) sa = 2.0 * br.length() - sa;
                sa = std::clamp(sa, 0.0, br.length());
                const LocalFrame f = tree.frame_at(br.id, sa);
                Particle pt;
                pt.position = br.curve.eval(sa) + tree.radius_at(br.id, sa, theta) * scale *
                                                      (std::cos(theta) * f.u + std::sin(theta) * f.v);
                pt.radius = r0;
                particles.push_back(pt);
            }
        }
    }
    ParticleSystem system(tree, std::move(particles), spacing, r0);
    system.update_normals(RelaxationParams{});
    return system;
}

double imf_scalar(double ratio, double alpha)
{
    const double y = alpha * ratio + (1.0 - alpha);
    const double y3 = y * y * y;
    return 1.0 / (y3 * y3) - 1.0 / y3;
}

Vec3 centerline_force(const Particle& particle, const VesselTree& tree, double alpha, PivotRule pivot)
{
    const ClosestPoint& cp = particle.closest;
    const Vec3 off = particle.position - cp.point;
    const double r = radius_along_direction(tree, cp.branch, cp.s, off);
    const Vec3 n = particle_normal_info(particle.position, cp, tree, pivot).normal;
    return imf_scalar(cp.distance / r, alpha) * n;
}

double repel_magnitude(double distance, double r_i, double r_j, double alpha)
{
    const double sum = r_i + r_j;
    if (distance > 0.5 * sum) return 0.0;
    return imf_scalar(distance / sum, alpha);
}

Vec3 repel_force(const Particle& pi, const Particle& pj, double alpha, std::size_t jitter_key)
{
    Vec3 raw = pi.position - pj.position;
    const Vec3& n = pi.normal;
    if (raw.norm() < 1e-9) {
        const Vec3 e1 = any_orthogonal(n);
        const Vec3 e2 = n.cross(e1);
        const double a = 2.399963229728653 * static_cast<double>(jitter_key); // golden angle
        raw += 1e-6 * pi.radius * (std::cos(a) * e1 + std::sin(a) * e2);
    }
    const double mag = repel_magnitude(raw.norm(), pi.radius, pj.radius, alpha);
    if (mag == 0.0) return Vec3::Zero();
    const Vec3 tangential = raw - raw.dot(n) * n;
    const double tn = tangential.norm();
    if (tn <= 1e-12 * raw.norm()) return Vec3::Zero();
    return mag * tangential / tn;
}

NeighborSets neighbor_set(const ParticleSystem& system, std::size_t i, std::size_t neighbor_count)
{
    NeighborSets out;
    const auto& parts = system.particles();
    std::vector<Neighbor> hits;
    system.index().knn(parts[i].position, neighbor_count + 1, hits);
    for (const Neighbor& h : hits) {
        if (h.index == i) continue;
        if (out.nearest.size() == neighbor_count) break;
        out.nearest.push_back(h.index);
        const double cutoff = 0.5 * (parts[i].radius + parts[h.index].radius);
        if (std::sqrt(h.dist2) <= cutoff) out.force.push_back(h.index);
    }
    return out;
}

double compress_magnitude(std::span<const Vec3> forces)
{
    double sum_norm = 0.0;
    Vec3 sum = Vec3::Zero();
    for (const Vec3& f : forces) {
        sum_norm += f.norm();
        sum += f;
    }
    return std::max(0.0, sum_norm - sum.norm());
}

double compress_magnitude(const ParticleSystem& system, std::size_t i, const RelaxationParams& params)
{
    const auto sets = neighbor_set(system, i, static_cast<std::size_t>(params.neighbor_count));
    std::vector<Vec3> forces;
    for (std::uint32_t j : sets.force) forces.push_back(repel_force(system.particles()[i], system.particles()[j], params.alpha, i));
    return compress_magnitude(forces);
}

double ideal_compress()
{
    return 6.0 * imf_scalar(0.5, 0.5);
}

double update_balloon_radius(double radius, double compress, const ResolvedParams& params)
{
    const double arg = std::max(1e-6, 1.0 + params.eta * (compress - ideal_compress()));
    const double dr = std::clamp(-std::log(arg), params.dr_min, params.dr_max);
    return std::clamp(radius + dr, params.r_floor, params.r_ceil);
}

StepStats relax_step(ParticleSystem& system, const RelaxationParams& params)
{
    const ResolvedParams rp = system.resolve(params);
    const VesselTree& tree = system.tree();
    auto& parts = system.particles();
    const std::size_t n = parts.size();

    std::vector<Vec3> delta(n, Vec3::Zero());
    std::vector<Vec3> normals(n);
    std::vector<double> radii(n);

    // Phase (a): forces from the frozen snapshot.
    detail::parallel_for(n, rp.workers, [&](std::size_t i) {
        const Particle& pi = parts[i];
        const ClosestPoint& cp = pi.closest;
        const Vec3 normal = particle_normal_info(pi.position, cp, tree, rp.pivot, rp.mid_angle_deg).normal;
        normals[i] = normal;

        Vec3 f_cl = Vec3::Zero();
        const Vec3 off = pi.position - cp.point;
        const Vec3 radial = off - off.dot(cp.tangent) * cp.tangent;
        if (radial.norm() >= 1e-9 * std::max(off.norm(), 1e-300)) {
            const double r = radius_along_direction(tree, cp.branch, cp.s, off);
            f_cl = imf_scalar(cp.distance / r, rp.alpha) * normal;
        }

        Particle probe = pi;
        probe.normal = normal;
        const auto sets = neighbor_set(system, i, rp.neighbor_count);
        Vec3 f_rep = Vec3::Zero();
        double sum_norm = 0.0;
        for (std::uint32_t j : sets.force) {
            const Vec3 f = repel_force(probe, parts[j], rp.alpha, i);
            f_rep += f;
            sum_norm += f.norm();
        }
        const double compress = std::max(0.0, sum_norm - f_rep.norm());
        Vec3 step = rp.step_scale * (rp.mu * f_cl + f_rep) / rp.mass;
        const double len = step.norm();
        if (len > rp.max_move) step *= rp.max_move / len;
        delta[i] = step;
        radii[i] = update_balloon_radius(pi.radius, compress, rp);
    });

    // Phase (b): apply.
    std::vector<Vec3> before(n);
    std::vector<double> old_radius(n);
    for (std::size_t i = 0; i < n; ++i) {
        before[i] = parts[i].position;
        old_radius[i] = parts[i].radius;
        parts[i].position += delta[i];
        parts[i].normal = normals[i];
        parts[i].radius = radii[i];
    }
    system.refresh(rp.workers);

    StepStats stats;
    stats.iteration = system.iteration() + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (parts[i].position - before[i]).norm();
        stats.mean_displacement += d;
        stats.max_displacement = std::max(stats.max_displacement, d);
        stats.mean_radius += parts[i].radius;
        stats.mean_radius_change += parts[i].radius - old_radius[i];
    }
    stats.mean_displacement /= static_cast<double>(n);
    stats.mean_radius /= static_cast<double>(n);
    stats.mean_radius_change /= static_cast<double>(n);
    system.advance_iteration();
    return stats;
}

RelaxResult relax(ParticleSystem& system, const RelaxationParams& params,
                  const std::function<void(const StepStats&)>& on_step)
{
    const ResolvedParams rp = system.resolve(params);
    RelaxResult result;
    for (int it = 0; it < rp.max_iters; ++it) {
        const StepStats stats = relax_step(system, params);
        result.history.push_back(stats);
        result.iterations = it + 1;
        if (on_step) on_step(stats);
        if (stats.mean_displacement < rp.term_eps &&
            std::abs(stats.mean_radius_change) < params.settle_fraction * rp.dr_max) {
            result.converged = true;
            break;
        }
    }
    system.update_normals(params);
    return result;
}

} // namespace tubemesh
