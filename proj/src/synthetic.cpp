// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/synthetic.hpp"

#include <cmath>
#include <functional>

namespace tubemesh {

std::string to_string(ShapeKind kind)
{
    switch (kind) {
    case ShapeKind::Tube: return "tube";
    case ShapeKind::CurvedTube: return "curved_tube";
    case ShapeKind::YBifurcation: return "y_bifurcation";
    case ShapeKind::NFurcation: return "n_furcation";
    case ShapeKind::StenosisTube: return "stenosis_tube";
    }
    return "unknown";
}

ShapeKind parse_shape_kind(const std::string& name)
{
    for (ShapeKind k : {ShapeKind::Tube, ShapeKind::CurvedTube, ShapeKind::YBifurcation, ShapeKind::NFurcation,
                        ShapeKind::StenosisTube}) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorCode::InvalidSpec, "unknown shape kind '" + name + "'");
}

void ShapeSpec::validate() const
{
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
    if (!(radius > 0.0)) fail("radius must be positive");
    if (!(length > 0.0)) fail("length must be positive");
    if (!(spacing > 0.0)) fail("spacing must be positive");
    if (spacing > length) fail("spacing exceeds length");
    if (k < 8) fail("k must be at least 8");
    const bool junction = kind == ShapeKind::YBifurcation || kind == ShapeKind::NFurcation;
    if (junction && !(branch_angle_deg > 0.0 && branch_angle_deg < 90.0)) fail("branch angle must be in (0, 90)");
    if (kind == ShapeKind::NFurcation && branch_count < 2) fail("branch count must be at least 2");
    if (kind == ShapeKind::StenosisTube && !(stenosis_depth >= 0.0 && stenosis_depth < 1.0)) {
        fail("stenosis depth must be in [0, 1)");
    }
    if (kind == ShapeKind::CurvedTube && length >= 2.0 * kPi * kBendFactor * radius) {
        fail("curved tube length exceeds one full turn");
    }
}

namespace {

std::size_t segment_count(const ShapeSpec& spec)
{
    return static_cast<std::size_t>(std::max(1.0, std::round(spec.length / spec.spacing)));
}

/// Branch along `path(s)` for s in [0, length] with radius profile `radius(s)`.
Branch sample_branch(int id, const ShapeSpec& spec, const std::function<Vec3(double)>& path,
                     const std::function<double(double)>& radius, std::optional<Attachment> parent)
{
    const std::size_t n = segment_count(spec);
    std::vector<Vec3> pos;
    std::vector<std::vector<double>> radii;
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = spec.length * static_cast<double>(i) / static_cast<double>(n);
        pos.push_back(path(s));
        radii.emplace_back(spec.k, radius(s));
    }
    Branch b = make_branch(id, pos, radii, parent);
    return build_rmf_frames(std::move(b), Vec3::UnitX());
}

std::vector<Branch> junction(const ShapeSpec& spec, const std::vector<Vec3>& child_dirs)
{
    std::vector<Branch> out;
    const double r = spec.radius;
    out.push_back(sample_branch(
        0, spec, [&](double s) { return Vec3(0, 0, s - spec.length); }, [&](double) { return r; }, std::nullopt));
    const Attachment at{0, out[0].nodes.size() - 1};
    for (std::size_t c = 0; c < child_dirs.size(); ++c) {
        const Vec3 d = child_dirs[c];
        out.push_back(sample_branch(
            static_cast<int>(c + 1), spec, [&](double s) { return Vec3(s * d); },
            [&](double) { return kChildTaper * r; }, at));
    }
    return out;
}

} // namespace

VesselTree generate(const ShapeSpec& spec, std::uint64_t /*seed*/)
{
    spec.validate();
    const double r = spec.radius;
    const double L = spec.length;
    const double beta = spec.branch_angle_deg * kPi / 180.0;
    std::vector<Branch> branches;

    switch (spec.kind) {
    case ShapeKind::Tube:
        branches.push_back(sample_branch(
            0, spec, [](double s) { return Vec3(0, 0, s); }, [&](double) { return r; }, std::nullopt));
        break;
    case ShapeKind::CurvedTube: {
        const double bend = kBendFactor * r;
        branches.push_back(sample_branch(
            0, spec,
            [&](double s) {
                const double a = s / bend;
                return Vec3(bend * (1.0 - std::cos(a)), 0.0, bend * std::sin(a));
            },
            [&](double) { return r; }, std::nullopt));
        break;
    }
    case ShapeKind::StenosisTube:
        branches.push_back(sample_branch(
            0, spec, [](double s) { return Vec3(0, 0, s); },
            [&](double s) {
                const double x = (s - 0.5 * L) / (0.1 * L);
                return r * (1.0 - spec.stenosis_depth * std::exp(-x * x));
            },
            std::nullopt));
        break;
    case ShapeKind::YBifurcation:
        branches = junction(spec, {Vec3(std::sin(beta), 0, std::cos(beta)), Vec3(-std::sin(beta), 0, std::cos(beta))});
        break;
    case ShapeKind::NFurcation: {
        std::vector<Vec3> dirs;
        for (int i = 0; i < spec.branch_count; ++i) {
            const double phi = 2.0 * kPi * i / spec.branch_count;
            dirs.emplace_back(std::sin(beta) * std::cos(phi), std::sin(beta) * std::sin(phi), std::cos(beta));
        }
        branches = junction(spec, dirs);
        break;
    }
    }
    return VesselTree(std::move(branches));
}

} // namespace tubemesh
