// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/centerline.hpp"
#include "tubemesh/mesh.hpp"
#include "tubemesh/metrics.hpp"
#include "tubemesh/relaxation.hpp"
#include "tubemesh/triangulation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tubemesh {

/// Formats with 9 significant digits.
std::string format_number(double x);
/// Rounds to what format_number prints.
double round9(double x);

std::string centerline_to_json(const VesselTree& tree, const Vec3& frame_seed_u = Vec3::UnitX());
/// Parses and validates a centerline document; frames are rebuilt from
/// frame_seed_u. Throws ParseError, SchemaError or UnitError.
VesselTree centerline_from_json(const std::string& text);

void write_centerline(const VesselTree& tree, const std::filesystem::path& path,
                      const Vec3& frame_seed_u = Vec3::UnitX());
VesselTree read_centerline(const std::filesystem::path& path);

struct Cloud {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<double> radii;
};

Cloud cloud_of(const ParticleSystem& system);
std::string cloud_to_csv(const Cloud& cloud);
Cloud cloud_from_csv(const std::string& text);
void write_cloud(const Cloud& cloud, const std::filesystem::path& path);
Cloud read_cloud(const std::filesystem::path& path);

/// Rebuilds a particle system on `tree`; rim flags come from the tree.
ParticleSystem system_from_cloud(const VesselTree& tree, const Cloud& cloud);

enum class MeshFormat { Obj, Ply };

/// Picks the format from the extension (.obj or .ply); throws IoError otherwise.
MeshFormat mesh_format_for(const std::filesystem::path& path);

std::string mesh_to_obj(const TriangleMesh& mesh);
std::string mesh_to_ply(const TriangleMesh& mesh);
void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format);
void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

TriangleMesh mesh_from_obj(const std::string& text);
TriangleMesh mesh_from_ply(const std::string& text);
TriangleMesh read_mesh(const std::filesystem::path& path);

std::string report_to_json(const MeshReport& report);
std::string histogram_to_csv(const MeshReport& report);
std::string defects_to_csv(const std::vector<MeshDefect>& defects);
std::string stats_to_csv(const std::vector<StepStats>& history);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace tubemesh
