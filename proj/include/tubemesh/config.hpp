// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubemesh/relaxation.hpp"
#include "tubemesh/triangulation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace tubemesh {

/// Flat `key = value` configuration; `#` starts a comment.
///
/// Keys: alpha, mu, mass, step_scale, eta, dr_max, dr_min, max_move,
/// term_eps, settle_fraction, max_iters, M, workers, pivot (near_ray |
/// bisector), density, seed, completion_passes, max_hole_edges, out, report,
/// cloud, stats.
struct PipelineConfig {
    RelaxationParams relax;
    TriangulationParams mesh;
    double density = 16.0; // particles per mm^2
    std::uint64_t seed = 42;
    std::string out, report, cloud, stats;

    /// Range checks every value; throws InvalidParams.
    void validate() const;
};

/// Throws ParseError (with line number) on syntax errors and unknown keys,
/// InvalidParams on out-of-range values.
PipelineConfig parse_config(const std::string& text);
PipelineConfig read_config(const std::filesystem::path& path);

} // namespace tubemesh
