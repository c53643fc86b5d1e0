#include "tubemesh/mesh.hpp"

#include <doctest.h>

using namespace tubemesh;

namespace {

TriangleMesh square()
{
    TriangleMesh m({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {5, 5, 5}}, {});
    m.add_triangle({0, 1, 2});
    m.add_triangle({0, 2, 3});
    return m;
}

ErrorCode code_of(TriangleMesh& m, const Triangle& t)
{
    try {
        m.add_triangle(t);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("edge map and adjacency")
{
    const TriangleMesh m = square();
    CHECK(m.triangle_count() == 2);
    CHECK(m.edge_map().size() == 5);
    CHECK(m.edge_triangles(0, 2).size() == 2);
    CHECK(m.edge_triangles(2, 0).size() == 2);
    CHECK(m.edge_triangles(1, 3).empty());
    CHECK(m.has_directed_edge(0, 1));
    CHECK_FALSE(m.has_directed_edge(1, 0));
    CHECK(m.has_triangle(2, 0, 1));
    CHECK_FALSE(m.has_triangle(1, 2, 3));
    CHECK(m.vertex_triangles(0).size() == 2);
    CHECK(m.triangle_area(0) == doctest::Approx(0.5));
    CHECK((m.triangle_normal(0).normalized() - Vec3::UnitZ()).norm() < 1e-12);
}

TEST_CASE("degenerate triangles are rejected")
{
    TriangleMesh m({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}}, {});
    CHECK(code_of(m, {0, 0, 1}) == ErrorCode::DegenerateTriangle);
    CHECK(code_of(m, {0, 1, 9}) == ErrorCode::DegenerateTriangle);
    CHECK(code_of(m, {0, 1, 2}) == ErrorCode::DegenerateTriangle);
    CHECK(m.triangle_count() == 0);
    CHECK_NOTHROW(m.add_triangle({0, 1, 3}));
}

TEST_CASE("compact drops unreferenced vertices")
{
    TriangleMesh m = square();
    const auto remap = m.compact();
    CHECK(m.vertex_count() == 4);
    CHECK(remap[4] == UINT32_MAX);
    CHECK(remap[2] == 2);
    CHECK(m.triangle_count() == 2);
    CHECK(m.edge_triangles(0, 2).size() == 2);
}

TEST_CASE("remove triangles keeps the rest in order")
{
    TriangleMesh m = square();
    m.add_triangle({1, 4, 2});
    m.remove_triangles({1});
    REQUIRE(m.triangle_count() == 2);
    CHECK(m.triangles()[0] == Triangle{0, 1, 2});
    CHECK(m.triangles()[1] == Triangle{1, 4, 2});
    CHECK(m.edge_triangles(0, 3).empty());
    CHECK_FALSE(m.has_directed_edge(2, 3));
}

TEST_CASE("fan components detect pinched vertices")
{
    // Two triangles touching only at vertex 0.
    TriangleMesh m({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {-1, 0, 0}, {-1, -1, 0}}, {});
    m.add_triangle({0, 1, 2});
    m.add_triangle({0, 3, 4});
    CHECK(m.fan_components(0).size() == 2);
    CHECK(m.fan_components(1).size() == 1);
    const TriangleMesh s = square();
    CHECK(s.fan_components(0).size() == 1);
    CHECK(s.fan_components(0).front().size() == 2);
}
