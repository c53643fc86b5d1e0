// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/common.hpp"

#include <span>
#include <vector>

namespace tubemesh {

/// Not-a-knot cubic spline through 3D points, parameterized by cumulative chord
/// length. With two points it degenerates to the straight segment.
class CubicSpline3 {
public:
    CubicSpline3() = default;
    explicit CubicSpline3(std::span<const Vec3> points);

    double length_param() const { return knots_.empty() ? 0.0 : knots_.back(); }
    const std::vector<double>& knots() const { return knots_; }
    bool empty() const { return knots_.empty(); }

    Vec3 eval(double t) const;
    Vec3 derivative(double t) const;
    Vec3 second_derivative(double t) const;

    /// Arclength between parameters, by composite Gauss-Legendre quadrature.
    double arclength(double t0, double t1) const;

    /// Index of the knot interval containing `t` (clamped).
    std::size_t segment(double t) const;

private:
    std::vector<double> knots_;
    std::vector<Vec3> points_;
    std::vector<Vec3> second_; // second derivatives at knots
};

} // namespace tubemesh
