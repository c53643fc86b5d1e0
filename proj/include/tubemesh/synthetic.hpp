// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/centerline.hpp"

#include <cstdint>
#include <string>

namespace tubemesh {

enum class ShapeKind { Tube, CurvedTube, YBifurcation, NFurcation, StenosisTube };

std::string to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);

struct ShapeSpec {
    ShapeKind kind = ShapeKind::Tube;
    double radius = 1.0;
    double length = 10.0;
    double spacing = 1.0;
    std::size_t k = 16;
    double branch_angle_deg = 40.0;
    int branch_count = 3;
    double stenosis_depth = 0.5;

    void validate() const;
};

/// Child radius relative to the parent for junction shapes.
inline constexpr double kChildTaper = 0.8;
/// Bend radius of curved_tube relative to its lumen radius.
inline constexpr double kBendFactor = 5.0;

/// Builds the fixture tree. Generators are deterministic; the seed is accepted
/// for interface symmetry and does not affect the geometry.
VesselTree generate(const ShapeSpec& spec, std::uint64_t seed = 42);

} // namespace tubemesh
