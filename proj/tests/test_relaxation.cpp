#include "tubemesh/metrics.hpp"
#include "tubemesh/relaxation.hpp"
#include "tubemesh/synthetic.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace tubemesh;
using testing_support::straight_tube;

namespace {

Particle at(const VesselTree& tree, const Vec3& p, double radius = 0.1)
{
    Particle pt;
    pt.position = p;
    pt.radius = radius;
    pt.closest = tree.closest(p);
    pt.normal = particle_normal(pt, tree);
    return pt;
}

/// Four particles on a long tube, far apart; the first at `first`.
ParticleSystem sparse_system(const VesselTree& tree, const Vec3& first)
{
    std::vector<Particle> parts = {at(tree, first), at(tree, {0, 1, 8}), at(tree, {-1, 0, 12}), at(tree, {0, -1, 16})};
    return ParticleSystem(tree, parts, 0.5, 0.1);
}

} // namespace

TEST_CASE("seed count follows the per-node formula")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 10);
    const ParticleSystem sys = seed_particles(tree, 3.18, 42);
    // round(3.18 * 2*pi * 1 * 1) = 20 per node, 11 nodes.
    CHECK(sys.size() == 220);
    const double r0 = 0.5 / std::sqrt(3.18);
    for (const auto& p : sys.particles()) {
        CHECK(p.radius == doctest::Approx(r0));
        const double d = std::hypot(p.position.x(), p.position.y());
        CHECK(d >= 0.9 - 1e-9);
        CHECK(d <= 1.1 + 1e-9);
    }
}

TEST_CASE("seeding at one particle per node")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 10);
    const double density = 1.0 / (2 * M_PI);
    const ParticleSystem sys = seed_particles(tree, density, 1);
    CHECK(sys.size() == 11);
}

TEST_CASE("seeding is deterministic and rejects bad input")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 10);
    const ParticleSystem a = seed_particles(tree, 5.0, 9);
    const ParticleSystem b = seed_particles(tree, 5.0, 9);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.particles()[i].position == b.particles()[i].position);
    try {
        seed_particles(VesselTree{}, 5.0, 1);
        FAIL("expected EmptyTree");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyTree);
    }
}

TEST_CASE("imf scalar values")
{
    CHECK(imf_scalar(1.0, 0.5) == 0.0);
    CHECK(imf_scalar(0.5, 0.5) == doctest::Approx(1 / std::pow(0.75, 6) - 1 / std::pow(0.75, 3)).epsilon(1e-14));
    CHECK(imf_scalar(0.5, 0.5) == doctest::Approx(3.2482853).epsilon(1e-7));
    CHECK(imf_scalar(2.0, 0.5) == doctest::Approx(-0.2085048).epsilon(1e-6));
    CHECK(std::pow(0.75, 6) == 0.177978515625);
}

TEST_CASE("imf sign law and shape")
{
    // y^-6 - y^-3 has its minimum at y^3 = 2.
    const double ratio_min = (std::cbrt(2.0) - 0.5) / 0.5;
    double prev = imf_scalar(1e-3, 0.5);
    for (int i = 1; i <= 4000; ++i) {
        const double ratio = 1e-3 + i * 1e-3;
        const double s = imf_scalar(ratio, 0.5);
        if (ratio <= ratio_min) CHECK(s < prev);
        if (ratio - 1e-3 >= ratio_min) CHECK(s > prev);
        if (ratio < 1.0 - 1e-12) CHECK(s > 0.0);
        if (ratio > 1.0 + 1e-12) CHECK(s < 0.0);
        prev = s;
    }
    CHECK(imf_scalar(ratio_min, 0.5) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(imf_scalar(1e6, 0.5) < 0.0);
    CHECK(imf_scalar(1e6, 0.5) > -1e-15);
}

TEST_CASE("centerline force on a straight tube")
{
    const VesselTree tree = straight_tube(1.0, 10.0);
    const Vec3 f_on = centerline_force(at(tree, {1, 0, 5}), tree, 0.5);
    CHECK(f_on.norm() < 1e-12);
    const Vec3 f_in = centerline_force(at(tree, {0.5, 0, 5}), tree, 0.5);
    CHECK((f_in - 3.2482853 * Vec3::UnitX()).norm() < 1e-6);
    const Vec3 f_out = centerline_force(at(tree, {0, 2, 5}), tree, 0.5);
    CHECK((f_out + 0.2085048 * Vec3::UnitY()).norm() < 1e-6);
}

TEST_CASE("repel magnitude")
{
    CHECK(repel_magnitude(0.6, 0.5, 0.5, 0.5) == 0.0);
    CHECK(repel_magnitude(0.25, 0.5, 0.5, 0.5) == doctest::Approx(12.681216).epsilon(1e-9));
    CHECK(repel_magnitude(0.5, 0.5, 0.5, 0.5) == doctest::Approx(3.2482853).epsilon(1e-7));
    CHECK(repel_magnitude(0.5 * 0.7, 0.3, 0.4, 0.5) == doctest::Approx(3.2482853).epsilon(1e-7));
}

TEST_CASE("repel force is tangential and antisymmetric")
{
    const VesselTree tree = straight_tube(1.0, 10.0);
    Particle a = at(tree, {1, 0, 5}, 0.2);
    Particle b = at(tree, {std::cos(0.1), std::sin(0.1), 5.05}, 0.2);
    const Vec3 fa = repel_force(a, b, 0.5);
    const Vec3 fb = repel_force(b, a, 0.5);
    CHECK(fa.norm() > 0.0);
    CHECK(std::abs(fa.dot(a.normal)) < 1e-12);
    CHECK(std::abs(fb.dot(b.normal)) < 1e-12);
    CHECK(fa.norm() == doctest::Approx(fb.norm()));
    // Unprojected pair sums to zero when both normals are orthogonal to the separation.
    Particle c = a, d = a;
    c.position = {1, 0, 5};
    d.position = {1, 0, 5.1};
    c.normal = d.normal = Vec3::UnitX();
    CHECK((repel_force(c, d, 0.5) + repel_force(d, c, 0.5)).norm() < 1e-12);
}

TEST_CASE("coincident particles get a deterministic direction")
{
    const VesselTree tree = straight_tube(1.0, 10.0);
    Particle a = at(tree, {1, 0, 5}, 0.2);
    const Vec3 f1 = repel_force(a, a, 0.5, 3);
    const Vec3 f2 = repel_force(a, a, 0.5, 3);
    CHECK(f1.norm() > 0.0);
    CHECK(std::isfinite(f1.norm()));
    CHECK(f1 == f2);
    CHECK((repel_force(a, a, 0.5, 4) - f1).norm() > 0.0);
}

TEST_CASE("neighbor sets")
{
    SUBCASE("M-set matches brute force on a random cloud")
    {
        const VesselTree tree = straight_tube(1.0, 10.0);
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> a(0, 2 * M_PI), z(0.5, 9.5);
        std::vector<Particle> parts;
        for (int i = 0; i < 100; ++i) {
            const double t = a(rng);
            parts.push_back(at(tree, {std::cos(t), std::sin(t), z(rng)}, 0.3));
        }
        const ParticleSystem sys(tree, parts, 0.5, 0.3);
        for (std::size_t i = 0; i < sys.size(); ++i) {
            std::vector<std::pair<double, std::uint32_t>> all;
            for (std::size_t j = 0; j < sys.size(); ++j) {
                if (j == i) continue;
                all.push_back({(sys.particles()[j].position - sys.particles()[i].position).squaredNorm(),
                               static_cast<std::uint32_t>(j)});
            }
            std::sort(all.begin(), all.end());
            const auto sets = neighbor_set(sys, i, 25);
            REQUIRE(sets.nearest.size() == 25);
            for (std::size_t k = 0; k < 25; ++k) CHECK(sets.nearest[k] == all[k].second);
            for (std::uint32_t j : sets.force) {
                CHECK((sys.particles()[j].position - sys.particles()[i].position).norm() <= 0.3 + 1e-12);
            }
        }
    }
    SUBCASE("clamped to the other particles")
    {
        const VesselTree tree = straight_tube(1.0, 10.0);
        const ParticleSystem sys = sparse_system(tree, {1, 0, 4});
        CHECK(neighbor_set(sys, 0, 25).nearest.size() == 3);
    }
    SUBCASE("pair at the sum of radii is outside the cutoff")
    {
        const VesselTree tree = straight_tube(1.0, 20.0, 20);
        std::vector<Particle> parts = {at(tree, {1, 0, 4}, 0.1), at(tree, {1, 0, 4.2}, 0.1), at(tree, {-1, 0, 10}, 0.1),
                                       at(tree, {-1, 0, 15}, 0.1)};
        const ParticleSystem sys(tree, parts, 0.5, 0.1);
        CHECK(neighbor_set(sys, 0, 25).force.empty());
    }
}

TEST_CASE("compress magnitude")
{
    const std::vector<Vec3> one = {{1, 2, 0}};
    CHECK(compress_magnitude(one) == 0.0);
    const std::vector<Vec3> opposed = {{2, 0, 0}, {-2, 0, 0}};
    CHECK(compress_magnitude(opposed) == doctest::Approx(4.0));
    std::vector<Vec3> hex;
    const double m = repel_magnitude(0.5, 0.5, 0.5, 0.5);
    for (int k = 0; k < 6; ++k) hex.push_back(m * Vec3(std::cos(k * M_PI / 3), std::sin(k * M_PI / 3), 0));
    CHECK(compress_magnitude(hex) == doctest::Approx(19.489712).epsilon(1e-8));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Vec3> f(1 + trial % 7);
        for (auto& v : f) v = {g(rng), g(rng), g(rng)};
        CHECK(compress_magnitude(f) >= 0.0);
    }
}

TEST_CASE("ideal compression constant")
{
    CHECK(ideal_compress() == doctest::Approx(19.4897).epsilon(1e-3 / 19.4897));
    CHECK(std::abs(ideal_compress() - 6 * repel_magnitude(0.5, 0.5, 0.5, 0.5)) < 1e-9);
    CHECK(ideal_compress() > 0.0);
}

TEST_CASE("balloon radius update")
{
    const VesselTree tree = straight_tube(1.0, 20.0, 20);
    const ParticleSystem sys = sparse_system(tree, {1, 0, 4});
    RelaxationParams params;
    params.dr_max = 1.0;
    params.dr_min = -1.0;
    ResolvedParams rp = sys.resolve(params);
    rp.r_floor = 0.0;
    rp.r_ceil = 10.0;
    CHECK(update_balloon_radius(1.0, ideal_compress(), rp) == doctest::Approx(1.0));
    CHECK(update_balloon_radius(1.0, 0.0, rp) - 1.0 == doctest::Approx(-std::log(1 - 0.01 * ideal_compress())));
    CHECK(update_balloon_radius(1.0, 0.0, rp) - 1.0 == doctest::Approx(0.21677).epsilon(1e-4));
    CHECK(update_balloon_radius(1.0, 2 * ideal_compress(), rp) - 1.0 == doctest::Approx(-std::log(1 + 0.01 * ideal_compress())));
    CHECK(update_balloon_radius(1.0, 2 * ideal_compress(), rp) - 1.0 == doctest::Approx(-0.1780600).epsilon(1e-5));

    const ResolvedParams def = sys.resolve(RelaxationParams{});
    CHECK(update_balloon_radius(0.1, 0.0, def) == doctest::Approx(0.1 + def.dr_max));
    CHECK(update_balloon_radius(0.1, 2 * ideal_compress(), def) == doctest::Approx(0.1 + def.dr_min));
    // Log argument guard and radius bounds.
    const double r = update_balloon_radius(0.1, 1e9, def);
    CHECK(std::isfinite(r));
    CHECK(r >= def.r_floor);
    CHECK(update_balloon_radius(def.r_ceil, 0.0, def) == doctest::Approx(def.r_ceil));
}

TEST_CASE("negative feedback: a larger balloon feels more repulsion")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int trial = 0; trial < 100; ++trial) {
        Particle pi;
        pi.position = Vec3::Zero();
        pi.normal = Vec3::UnitZ();
        pi.radius = 0.2;
        std::vector<Particle> others(6);
        for (auto& o : others) {
            o.position = {u(rng), u(rng), 0.1 * u(rng)};
            o.radius = 0.2;
        }
        auto total = [&](double r) {
            Particle p = pi;
            p.radius = r;
            double s = 0.0;
            for (const auto& o : others) s += repel_force(p, o, 0.5).norm();
            return s;
        };
        bool inside = false;
        for (const auto& o : others) inside |= o.position.norm() <= 0.5 * (0.25 + o.radius);
        if (inside) CHECK(total(0.25) > total(0.2));
    }
}

TEST_CASE("relax step moves a lone particle by the force law")
{
    const VesselTree tree = straight_tube(1.0, 20.0, 20);
    ParticleSystem sys = sparse_system(tree, {0.5, 0, 4});
    RelaxationParams params;
    params.step_scale = 0.01;
    params.max_move = 10.0;
    relax_step(sys, params);
    const Vec3 expect(0.5 + 0.01 * params.mu * 3.2482853 / params.mass, 0, 4);
    CHECK((sys.particles()[0].position - expect).norm() < 1e-6);
    // On-surface particles do not move.
    CHECK((sys.particles()[1].position - Vec3(0, 1, 8)).norm() < 1e-12);
}

TEST_CASE("relax step displacements are finite and capped")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 10);
    ParticleSystem sys = seed_particles(tree, 16.0, 42);
    const std::vector<Particle> before = sys.particles();
    RelaxationParams params;
    const ResolvedParams rp = sys.resolve(params);
    const StepStats s = relax_step(sys, params);
    CHECK(std::isfinite(s.mean_displacement));
    CHECK(s.max_displacement <= rp.max_move + 1e-12);
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const auto& p = sys.particles()[i];
        CHECK(std::isfinite(p.position.norm()));
        CHECK(std::abs(p.normal.norm() - 1.0) < 1e-9);
        CHECK(p.radius >= rp.r_floor);
        CHECK(p.radius <= rp.r_ceil);
    }
}

TEST_CASE("max_iters 0 is not converged")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 10);
    ParticleSystem sys = seed_particles(tree, 4.0, 42);
    RelaxationParams params;
    params.max_iters = 0;
    const RelaxResult r = relax(sys, params);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 0);
}

TEST_CASE("relaxation on a tube locks to the surface and evens spacing")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 40);
    ParticleSystem sys = seed_particles(tree, 16.0, 42);
    const double cv0 = uniformity_cv(sys);
    const RelaxResult r = relax(sys, RelaxationParams{});
    CHECK(r.converged);
    CHECK(r.iterations <= 100);
    double mean_sd = 0.0;
    for (const auto& p : sys.particles()) mean_sd += std::abs(implicit_signed_distance(tree, p.position));
    mean_sd /= static_cast<double>(sys.size());
    CHECK(mean_sd <= 0.05);
    CHECK(uniformity_cv(sys) < cv0);
}

TEST_CASE("an on-surface lattice is a near fixed point")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 40);
    const ParticleSystem seeded = seed_particles(tree, 16.0, 42);
    ParticleSystem sys = seeded;
    relax(sys, RelaxationParams{});
    // Restart from the converged state with its radii.
    ParticleSystem again(tree, sys.particles(), sys.seed_spacing(), sys.initial_radius());
    const RelaxResult r = relax(again, RelaxationParams{});
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
}

TEST_CASE("results do not depend on the worker count")
{
    const VesselTree y = testing_support::shape(ShapeKind::YBifurcation, 5.0);
    ParticleSystem a = seed_particles(y, 8.0, 42);
    ParticleSystem b = a;
    RelaxationParams p1, p3;
    p1.max_iters = p3.max_iters = 5;
    p3.workers = 3;
    relax(a, p1);
    relax(b, p3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.particles()[i].position == b.particles()[i].position);
        CHECK(a.particles()[i].radius == b.particles()[i].radius);
    }
}

TEST_CASE("params validation")
{
    auto bad = [](auto mutate) {
        RelaxationParams p;
        mutate(p);
        try {
            p.validate();
            return false;
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidParams;
        }
    };
    CHECK(bad([](RelaxationParams& p) { p.alpha = 1.0; }));
    CHECK(bad([](RelaxationParams& p) { p.mass = 0.0; }));
    CHECK(bad([](RelaxationParams& p) { p.dr_min = 0.1; }));
    CHECK(bad([](RelaxationParams& p) { p.dr_max = -0.1; }));
    CHECK(bad([](RelaxationParams& p) { p.term_eps = 0.0; }));
    CHECK(bad([](RelaxationParams& p) { p.neighbor_count = 5; }));
    CHECK_NOTHROW(RelaxationParams{}.validate());
}
