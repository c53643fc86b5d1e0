// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>
#include <string_view>

namespace tubemesh {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
    DegenerateBranch,
    ParallelSeed,
    AxialDirection,
    EmptyTree,
    DegenerateTriangle,
    HasBifurcation,
    InvalidSpec,
    InvalidParams,
    ParseError,
    SchemaError,
    UnitError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DegenerateBranch: return "DegenerateBranch";
    case ErrorCode::ParallelSeed: return "ParallelSeed";
    case ErrorCode::AxialDirection: return "AxialDirection";
    case ErrorCode::EmptyTree: return "EmptyTree";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::HasBifurcation: return "HasBifurcation";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnitError: return "UnitError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Any unit vector orthogonal to `n`, chosen from the axis where `n` has the
/// smallest component. Deterministic for a given input.
inline Vec3 any_orthogonal(const Vec3& n)
{
    Eigen::Index axis = 0;
    n.cwiseAbs().minCoeff(&axis);
    Vec3 e = Vec3::Zero();
    e[axis] = 1.0;
    return e.cross(n).normalized();
}

} // namespace tubemesh
