// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/spline.hpp"

#include <algorithm>
#include <array>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace tubemesh {

CubicSpline3::CubicSpline3(std::span<const Vec3> points) : points_(points.begin(), points.end())
{
    const std::size_t n = points_.size();
    if (n < 2) throw Error(ErrorCode::DegenerateBranch, "spline needs at least 2 points");

    knots_.resize(n);
    knots_[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double h = (points_[i] - points_[i - 1]).norm();
        if (h <= 0.0) throw Error(ErrorCode::DegenerateBranch, "coincident consecutive nodes");
        knots_[i] = knots_[i - 1] + h;
    }

    // Second derivatives at the knots; not-a-knot ends (third derivative
    // continuous across the second and the second-to-last knot).
    second_.assign(n, Vec3::Zero());
    if (n == 2) return;
    auto h = [&](std::size_t i) { return knots_[i + 1] - knots_[i]; };
    auto slope_jump = [&](std::size_t i) {
        return Vec3(6.0 * ((points_[i + 1] - points_[i]) / h(i) - (points_[i] - points_[i - 1]) / h(i - 1)));
    };
    if (n == 3) {
        // One parabola through all three points.
        const Vec3 m = slope_jump(1) / (3.0 * (h(0) + h(1)));
        second_.assign(3, m);
        return;
    }

    std::vector<Eigen::Triplet<double>> entries;
    Eigen::MatrixX3d rhs = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(n), 3);
    const auto at = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
    entries.emplace_back(0, 0, h(1));
    entries.emplace_back(0, 1, -(h(0) + h(1)));
    entries.emplace_back(0, 2, h(0));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        entries.emplace_back(at(i), at(i - 1), h(i - 1));
        entries.emplace_back(at(i), at(i), 2.0 * (h(i - 1) + h(i)));
        entries.emplace_back(at(i), at(i + 1), h(i));
        rhs.row(at(i)) = slope_jump(i).transpose();
    }
    entries.emplace_back(at(n - 1), at(n - 3), h(n - 2));
    entries.emplace_back(at(n - 1), at(n - 2), -(h(n - 3) + h(n - 2)));
    entries.emplace_back(at(n - 1), at(n - 1), h(n - 3));

    Eigen::SparseMatrix<double> a(at(n), at(n));
    a.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::DegenerateBranch, "spline system is singular");
    const Eigen::MatrixX3d m = lu.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) second_[i] = m.row(at(i)).transpose();
}

std::size_t CubicSpline3::segment(double t) const
{
    if (t <= knots_.front()) return 0;
    if (t >= knots_.back()) return knots_.size() - 2;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

Vec3 CubicSpline3::eval(double t) const
{
    t = std::clamp(t, knots_.front(), knots_.back());
    const std::size_t i = segment(t);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - t) / h;
    const double b = (t - knots_[i]) / h;
    return a * points_[i] + b * points_[i + 1]
        + ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * (h * h) / 6.0;
}

Vec3 CubicSpline3::derivative(double t) const
{
    t = std::clamp(t, knots_.front(), knots_.back());
    const std::size_t i = segment(t);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - t) / h;
    const double b = (t - knots_[i]) / h;
    return (points_[i + 1] - points_[i]) / h
        + ((1.0 - 3.0 * a * a) * second_[i] + (3.0 * b * b - 1.0) * second_[i + 1]) * h / 6.0;
}

Vec3 CubicSpline3::second_derivative(double t) const
{
    t = std::clamp(t, knots_.front(), knots_.back());
    const std::size_t i = segment(t);
    const double h = knots_[i + 1] - knots_[i];
    const double b = (t - knots_[i]) / h;
    return (1.0 - b) * second_[i] + b * second_[i + 1];
}

double CubicSpline3::arclength(double t0, double t1) const
{
    if (t1 < t0) return -arclength(t1, t0);
    // 5-point Gauss-Legendre per piece, pieces aligned with knot intervals.
    static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                             -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665,
                                             0.4786286704993665, 0.2369268850561891,
                                             0.2369268850561891};
    double total = 0.0;
    double a = t0;
    while (a < t1) {
        const std::size_t i = segment(a);
        double b = std::min(t1, knots_[i + 1]);
        if (b <= a) b = t1; // past the last knot
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < x.size(); ++q) total += w[q] * half * derivative(mid + half * x[q]).norm();
        a = b;
    }
    return total;
}

} // namespace tubemesh
