// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/config.hpp"

#include "tubemesh/io.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace tubemesh {

void PipelineConfig::validate() const
{
    relax.validate();
    mesh.validate();
    if (!(density > 0.0) || !std::isfinite(density)) throw Error(ErrorCode::InvalidParams, "density must be positive");
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

PipelineConfig parse_config(const std::string& text)
{
    PipelineConfig cfg;
    std::size_t lineno = 0;
    std::string value;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + msg);
    };
    auto number = [&]() {
        char* end = nullptr;
        const double x = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0') fail("'" + value + "' is not a number");
        return x;
    };
    auto integer = [&]() {
        char* end = nullptr;
        const long long x = std::strtoll(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0') fail("'" + value + "' is not an integer");
        return x;
    };

    const std::map<std::string, std::function<void()>> setters = {
        {"alpha", [&] { cfg.relax.alpha = number(); }},
        {"mu", [&] { cfg.relax.mu = number(); }},
        {"mass", [&] { cfg.relax.mass = number(); }},
        {"step_scale", [&] { cfg.relax.step_scale = number(); }},
        {"eta", [&] { cfg.relax.eta = number(); }},
        {"dr_max", [&] { cfg.relax.dr_max = number(); }},
        {"dr_min", [&] { cfg.relax.dr_min = number(); }},
        {"max_move", [&] { cfg.relax.max_move = number(); }},
        {"term_eps", [&] { cfg.relax.term_eps = number(); }},
        {"settle_fraction", [&] { cfg.relax.settle_fraction = number(); }},
        {"max_iters", [&] { cfg.relax.max_iters = static_cast<int>(integer()); }},
        {"M",
         [&] {
             const auto m = static_cast<int>(integer());
             cfg.relax.neighbor_count = m;
             cfg.mesh.neighbor_count = m;
         }},
        {"workers",
         [&] {
             const long long w = integer();
             if (w < 1) fail("workers must be at least 1");
             cfg.relax.workers = static_cast<unsigned>(w);
         }},
        {"pivot",
         [&] {
             if (value == "near_ray") cfg.relax.pivot = PivotRule::NearRayNormal;
             else if (value == "bisector") cfg.relax.pivot = PivotRule::BisectorProjection;
             else fail("pivot must be near_ray or bisector");
         }},
        {"density", [&] { cfg.density = number(); }},
        {"seed",
         [&] {
             const long long s = integer();
             if (s < 0) fail("seed must be non-negative");
             cfg.seed = static_cast<std::uint64_t>(s);
         }},
        {"completion_passes", [&] { cfg.mesh.completion_passes = static_cast<int>(integer()); }},
        {"max_hole_edges", [&] { cfg.mesh.max_hole_edges = static_cast<int>(integer()); }},
        {"out", [&] { cfg.out = value; }},
        {"report", [&] { cfg.report = value; }},
        {"cloud", [&] { cfg.cloud = value; }},
        {"stats", [&] { cfg.stats = value; }},
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        value = trim(line.substr(eq + 1));
        if (value.empty()) fail("missing value for '" + key + "'");
        const auto it = setters.find(key);
        if (it == setters.end()) fail("unknown key '" + key + "'");
        it->second();
    }
    cfg.validate();
    return cfg;
}

PipelineConfig read_config(const std::filesystem::path& path)
{
    return parse_config(read_text(path));
}

} // namespace tubemesh
