#include "tubemesh/spline.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace tubemesh;

TEST_CASE("knots are cumulative chord lengths")
{
    const std::vector<Vec3> pts = {{0, 0, 0}, {3, 4, 0}, {3, 4, 2}};
    const CubicSpline3 c(pts);
    REQUIRE(c.knots().size() == 3);
    CHECK(c.knots()[0] == 0.0);
    CHECK(c.knots()[1] == doctest::Approx(5.0));
    CHECK(c.knots()[2] == doctest::Approx(7.0));
    CHECK(c.length_param() == doctest::Approx(7.0));
}

TEST_CASE("spline interpolates its points")
{
    std::vector<Vec3> pts;
    for (int i = 0; i < 7; ++i) pts.push_back({std::cos(0.3 * i), std::sin(0.3 * i), 0.1 * i * i});
    const CubicSpline3 c(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((c.eval(c.knots()[i]) - pts[i]).norm() < 1e-12);
}

TEST_CASE("collinear points give the straight line")
{
    const std::vector<Vec3> pts = {{0, 0, 0}, {0, 0, 1}, {0, 0, 2.5}, {0, 0, 3}};
    const CubicSpline3 c(pts);
    for (double t = 0.0; t <= 3.0; t += 0.125) {
        CHECK((c.eval(t) - Vec3(0, 0, t)).norm() < 1e-12);
        CHECK((c.derivative(t) - Vec3::UnitZ()).norm() < 1e-12);
    }
    CHECK(c.arclength(0.5, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("two points degenerate to a segment")
{
    const std::vector<Vec3> pts = {{1, 1, 1}, {1, 3, 1}};
    const CubicSpline3 c(pts);
    CHECK((c.eval(1.0) - Vec3(1, 2, 1)).norm() < 1e-12);
}

TEST_CASE("derivative matches central differences")
{
    std::vector<Vec3> pts;
    for (int i = 0; i < 9; ++i) pts.push_back({double(i), std::sin(0.7 * i), std::cos(0.4 * i)});
    const CubicSpline3 c(pts);
    const double h = 1e-6;
    for (double t = 0.05; t < c.length_param() - 0.05; t += 0.37) {
        const Vec3 fd = (c.eval(t + h) - c.eval(t - h)) / (2 * h);
        CHECK((fd - c.derivative(t)).norm() < 1e-6);
    }
}

namespace {

Vec3 second_derivative(const CubicSpline3& c, double t)
{
    const double h = 1e-5;
    return (c.derivative(t + h) - c.derivative(t - h)) / (2 * h);
}

} // namespace

TEST_CASE("not-a-knot ends: first two and last two pieces share one cubic")
{
    const std::vector<Vec3> pts = {{0, 0, 0}, {1, 1, 0}, {2, 0, 0}, {3, 2, 0}, {4, 2, 1}, {5, 0, 1}};
    const CubicSpline3 c(pts);
    const auto& k = c.knots();
    // The second derivative of a single cubic is linear, so extrapolating
    // from one piece must land on the next.
    auto check_linear = [&](double a, double b, double x) {
        const Vec3 da = second_derivative(c, a);
        const Vec3 db = second_derivative(c, b);
        const Vec3 extrapolated = da + (db - da) * (x - a) / (b - a);
        CHECK((extrapolated - second_derivative(c, x)).norm() < 1e-4);
    };
    check_linear(0.25 * k[1], 0.75 * k[1], 0.5 * (k[1] + k[2]));
    const std::size_t n = k.size();
    check_linear(0.5 * (k[n - 3] + k[n - 2]), k[n - 2] + 0.25 * (k[n - 1] - k[n - 2]),
                 k[n - 2] + 0.75 * (k[n - 1] - k[n - 2]));
}

TEST_CASE("three points give one parabola")
{
    const std::vector<Vec3> pts = {{0, 0, 0}, {1, 1, 0}, {3, 0, 0}};
    const CubicSpline3 c(pts);
    const Vec3 m = second_derivative(c, 0.3);
    CHECK((second_derivative(c, 0.5 * (c.knots()[1] + c.knots()[2])) - m).norm() < 1e-4);
    CHECK(m.norm() > 0.1);
}

TEST_CASE("arclength of a sampled quarter circle")
{
    std::vector<Vec3> pts;
    for (int i = 0; i <= 8; ++i) {
        const double a = 0.5 * M_PI * i / 8.0;
        pts.push_back({std::cos(a), std::sin(a), 0});
    }
    const CubicSpline3 c(pts);
    CHECK(c.arclength(0.0, c.length_param()) == doctest::Approx(M_PI / 2).epsilon(1e-3));
}

TEST_CASE("segment lookup clamps")
{
    const std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const CubicSpline3 c(pts);
    CHECK(c.segment(-1.0) == 0);
    CHECK(c.segment(0.5) == 0);
    CHECK(c.segment(1.5) == 1);
    CHECK(c.segment(10.0) == 1);
}
