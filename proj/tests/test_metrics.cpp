#include "tubemesh/metrics.hpp"
#include "tubemesh/relaxation.hpp"
#include "tubemesh/synthetic.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace tubemesh;
using testing_support::straight_tube;

namespace {

TriangleMesh offset(TriangleMesh m, double delta)
{
    for (auto& v : m.vertices) {
        const Vec3 radial(v.x(), v.y(), 0.0);
        v += delta * radial.normalized();
    }
    return m;
}

} // namespace

TEST_CASE("triangle quality values")
{
    CHECK(triangle_quality({0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}) == doctest::Approx(1.0));
    CHECK(triangle_quality({0, 0, 0}, {1, 0, 0}, {0, 1, 0}) == doctest::Approx(1.414214).epsilon(1e-6));
    const double x = (4.0 - 1.0 + 6.25) / 5.0;
    CHECK(triangle_quality({0, 0, 0}, {2.5, 0, 0}, {x, std::sqrt(4.0 - x * x), 0}) == doctest::Approx(2.5));
    CHECK_THROWS_AS(triangle_quality({0, 0, 0}, {0, 0, 0}, {1, 0, 0}), Error);
}

TEST_CASE("triangle quality is invariant under rigid motion and scaling")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 200; ++i) {
        const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
        const Eigen::Matrix3d R = Eigen::AngleAxisd(3 * u(rng), Vec3(u(rng), u(rng), u(rng)).normalized()).toRotationMatrix();
        const Vec3 t(u(rng), u(rng), u(rng));
        const double s = 0.1 + std::abs(10 * u(rng));
        const double q = triangle_quality(a, b, c);
        CHECK(q >= 1.0);
        CHECK(triangle_quality(s * (R * a) + t, s * (R * b) + t, s * (R * c) + t) == doctest::Approx(q).epsilon(1e-9));
    }
}

TEST_CASE("quality histogram")
{
    const std::vector<double> q = {1.0, 1.05, 1.1, 1.45, 2.5, 4.99, 5.0, 7.3};
    const auto h = quality_histogram(q);
    CHECK(std::accumulate(h.begin(), h.end(), std::size_t{0}) == q.size());
    CHECK(h[0] == 2);
    CHECK(h[1] == 1);
    CHECK(h[4] == 1);
    CHECK(h[15] == 1);
    CHECK(h[39] == 1);
    CHECK(h[40] == 2);
}

TEST_CASE("structured reference mesh counts")
{
    const VesselTree tree = straight_tube(1.0, 2.0, 2, 4);
    const TriangleMesh m = structured_reference_mesh(tree);
    CHECK(m.vertex_count() == 12);
    CHECK(m.triangle_count() == 16);
    const TopologyReport t = topology_check(m, 2);
    CHECK(t.boundary_loops == 2);
    CHECK(t.watertight());
    for (const Vec3& v : m.vertices) CHECK(std::abs(implicit_signed_distance(tree, v)) < 1e-9);
    for (std::size_t i = 0; i < m.triangle_count(); ++i) {
        const Triangle& tri = m.triangles()[i];
        const Vec3 c = (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]) / 3.0;
        CHECK(m.triangle_normal(i).dot(Vec3(c.x(), c.y(), 0)) > 0.0);
    }
}

TEST_CASE("structured mesh rejects bifurcations")
{
    const VesselTree y = generate(ShapeSpec{ShapeKind::YBifurcation});
    try {
        structured_reference_mesh(y);
        FAIL("expected HasBifurcation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HasBifurcation);
    }
}

TEST_CASE("surface distance of the structured mesh and its offsets")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 40, 128);
    const TriangleMesh ref = structured_reference_mesh(tree);
    const DistanceStats d0 = mesh_surface_distance(ref, tree);
    CHECK(d0.mean < 1e-3);
    CHECK(d0.samples == 4 * ref.triangle_count());
    const DistanceStats d1 = mesh_surface_distance(offset(ref, 0.1), tree);
    CHECK(d1.mean == doctest::Approx(0.1).epsilon(0.05));
    CHECK(d1.max <= 0.1 + 1e-9);
    CHECK(d1.rms >= d1.mean - 1e-12);
    for (double delta : {0.001, 0.01, 0.05, 0.2}) {
        CHECK(mesh_surface_distance(offset(ref, delta), tree).mean >= d0.mean);
    }
    // Worker count does not change the result.
    CHECK(mesh_surface_distance(offset(ref, 0.1), tree, 3).mean == d1.mean);
}

TEST_CASE("surface distance without triangles uses vertices")
{
    const VesselTree tree = straight_tube(1.0, 10.0);
    const TriangleMesh m({{1.5, 0, 5}, {0, 0.5, 5}}, {});
    const DistanceStats d = mesh_surface_distance(m, tree);
    CHECK(d.samples == 2);
    CHECK(d.mean == doctest::Approx(0.5));
    CHECK(d.max == doctest::Approx(0.5));
}

TEST_CASE("uniformity coefficient of variation")
{
    std::vector<Vec3> lattice;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) lattice.emplace_back(0.3 * i, 0.3 * j, 0.0);
    }
    CHECK(uniformity_cv(lattice) < 1e-12);
    std::vector<Vec3> outlier = lattice;
    outlier.emplace_back(10.0, 10.0, 0.0);
    CHECK(uniformity_cv(outlier) > uniformity_cv(lattice));
}

TEST_CASE("report on the structured mesh")
{
    const VesselTree tree = straight_tube(1.0, 10.0, 20, 16);
    const MeshReport r = build_report(structured_reference_mesh(tree), tree);
    CHECK(r.qualities.size() == 20 * 32);
    CHECK(std::accumulate(r.histogram.begin(), r.histogram.end(), std::size_t{0}) == r.qualities.size());
    CHECK(r.mean_radius == doctest::Approx(1.0));
    CHECK(r.topology.boundary_loops == 2);
    CHECK(r.fraction_quality_le_2_5 == doctest::Approx(1.0));
    CHECK(r.mean_quality >= 1.0);
}
