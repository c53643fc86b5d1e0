// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/cli.hpp"

#include "tubemesh/config.hpp"
#include "tubemesh/io.hpp"
#include "tubemesh/metrics.hpp"
#include "tubemesh/relaxation.hpp"
#include "tubemesh/synthetic.hpp"
#include "tubemesh/triangulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>

namespace tubemesh {

namespace {

struct Options {
    // synth
    std::string shape = "tube";
    ShapeSpec spec;
    std::uint64_t synth_seed = 42;
    // shared
    std::string in, config, out, report, cloud, stats, histogram, defects, mesh;
    std::int64_t seed = -1;
};

PipelineConfig load_config(const Options& o)
{
    PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : read_config(o.config);
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    return cfg;
}

std::string pick(const std::string& flag, const std::string& fallback, const char* name)
{
    if (!flag.empty()) return flag;
    if (!fallback.empty()) return fallback;
    throw CLI::RequiredError(std::string("--") + name);
}

int cmd_synth(const Options& o, std::ostream& out)
{
    ShapeSpec spec = o.spec;
    spec.kind = parse_shape_kind(o.shape);
    const VesselTree tree = generate(spec, o.synth_seed);
    write_centerline(tree, o.out);
    out << "wrote " << o.out << " (" << tree.branches().size() << " branches)\n";
    return kExitOk;
}

int cmd_relax(const Options& o, std::ostream& out)
{
    const PipelineConfig cfg = load_config(o);
    const std::string out_path = pick(o.out, cfg.cloud, "out");
    const VesselTree tree = read_centerline(o.in);
    ParticleSystem system = seed_particles(tree, cfg.density, cfg.seed);
    const RelaxResult rr = relax(system, cfg.relax);
    write_cloud(cloud_of(system), out_path);
    const std::string stats = o.stats.empty() ? cfg.stats : o.stats;
    if (!stats.empty()) write_text(stats, stats_to_csv(rr.history));
    out << "relaxed " << system.size() << " particles in " << rr.iterations << " iterations"
        << (rr.converged ? "" : " (NotConverged)") << '\n';
    return rr.converged ? kExitOk : kExitFlagged;
}

int cmd_mesh(const Options& o, std::ostream& out)
{
    const PipelineConfig cfg = load_config(o);
    const VesselTree tree = read_centerline(o.in);
    const ParticleSystem system = system_from_cloud(tree, read_cloud(o.cloud));
    const TriangulationResult res = triangulate(system, cfg.mesh);
    write_mesh(res.mesh, pick(o.out, cfg.out, "out"));
    if (!o.defects.empty()) write_text(o.defects, defects_to_csv(res.defects));
    out << "meshed " << res.mesh.triangle_count() << " triangles"
        << (res.incomplete ? " (TriangulationIncomplete)" : "") << '\n';
    return res.incomplete ? kExitFlagged : kExitOk;
}

int cmd_metrics(const Options& o, std::ostream& out)
{
    const VesselTree tree = read_centerline(o.in);
    const TriangleMesh mesh = read_mesh(o.mesh);
    const MeshReport rep = build_report(mesh, tree);
    write_text(o.report, report_to_json(rep));
    if (!o.histogram.empty()) write_text(o.histogram, histogram_to_csv(rep));
    out << "mean quality " << format_number(rep.mean_quality) << ", mean distance "
        << format_number(rep.distance.mean) << " mm\n";
    return kExitOk;
}

int cmd_pipeline(const Options& o, std::ostream& out)
{
    const PipelineConfig cfg = load_config(o);
    const std::string mesh_path = pick(o.out, cfg.out, "out");
    const std::string report_path = pick(o.report, cfg.report, "report");
    const VesselTree tree = read_centerline(o.in);

    ParticleSystem system = seed_particles(tree, cfg.density, cfg.seed);
    const RelaxResult rr = relax(system, cfg.relax);
    const std::string cloud = o.cloud.empty() ? cfg.cloud : o.cloud;
    if (!cloud.empty()) write_cloud(cloud_of(system), cloud);
    const std::string stats = o.stats.empty() ? cfg.stats : o.stats;
    if (!stats.empty()) write_text(stats, stats_to_csv(rr.history));

    const TriangulationResult res = triangulate(system, cfg.mesh);
    write_mesh(res.mesh, mesh_path);
    if (!o.defects.empty()) write_text(o.defects, defects_to_csv(res.defects));

    MeshReport rep = build_report(res.mesh, tree, cfg.relax.workers);
    if (system.size() >= 2) rep.uniformity_cv = uniformity_cv(system);
    rep.converged = rr.converged;
    rep.incomplete = res.incomplete;
    rep.iterations = rr.iterations;
    write_text(report_path, report_to_json(rep));
    if (!o.histogram.empty()) write_text(o.histogram, histogram_to_csv(rep));

    out << system.size() << " particles, " << rr.iterations << " iterations, " << res.mesh.triangle_count()
        << " triangles";
    if (!rr.converged) out << " (NotConverged)";
    if (res.incomplete) out << " (TriangulationIncomplete)";
    out << '\n';
    return rr.converged && !res.incomplete ? kExitOk : kExitFlagged;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Particle-based surface meshing of tubular vessel trees", "tubemesh"};
    app.require_subcommand(1);
    Options o;

    auto* synth = app.add_subcommand("synth", "Write a synthetic centerline tree");
    synth->add_option("--shape", o.shape, "tube | curved_tube | y_bifurcation | n_furcation | stenosis_tube")->required();
    synth->add_option("--out", o.out, "Output centerline JSON")->required();
    synth->add_option("--radius", o.spec.radius, "Radius, mm");
    synth->add_option("--length", o.spec.length, "Branch length, mm");
    synth->add_option("--spacing", o.spec.spacing, "Node spacing, mm");
    synth->add_option("--k", o.spec.k, "Radial samples per node");
    synth->add_option("--angle", o.spec.branch_angle_deg, "Branch angle, degrees");
    synth->add_option("--branches", o.spec.branch_count, "Child count for n_furcation");
    synth->add_option("--depth", o.spec.stenosis_depth, "Stenosis depth fraction");
    synth->add_option("--seed", o.synth_seed, "Generator seed");

    auto* relax_cmd = app.add_subcommand("relax", "Seed and relax particles on a centerline tree");
    relax_cmd->add_option("--in", o.in, "Centerline JSON")->required();
    relax_cmd->add_option("--config", o.config, "Pipeline config file");
    relax_cmd->add_option("--out", o.out, "Output cloud CSV");
    relax_cmd->add_option("--stats", o.stats, "Per-iteration statistics CSV");
    relax_cmd->add_option("--seed", o.seed, "Override the config seed");

    auto* mesh_cmd = app.add_subcommand("mesh", "Triangulate a relaxed cloud");
    mesh_cmd->add_option("--in", o.in, "Centerline JSON")->required();
    mesh_cmd->add_option("--cloud", o.cloud, "Cloud CSV")->required();
    mesh_cmd->add_option("--config", o.config, "Pipeline config file");
    mesh_cmd->add_option("--out", o.out, "Output mesh (.obj or .ply)");
    mesh_cmd->add_option("--defects", o.defects, "Defect list CSV");

    auto* metrics_cmd = app.add_subcommand("metrics", "Quality, distance and topology report for a mesh");
    metrics_cmd->add_option("--mesh", o.mesh, "Mesh (.obj or .ply)")->required();
    metrics_cmd->add_option("--in", o.in, "Centerline JSON")->required();
    metrics_cmd->add_option("--report", o.report, "Output report JSON")->required();
    metrics_cmd->add_option("--histogram", o.histogram, "Quality histogram CSV");

    auto* pipeline = app.add_subcommand("pipeline", "Relax, triangulate and report in one run");
    pipeline->add_option("--in", o.in, "Centerline JSON")->required();
    pipeline->add_option("--config", o.config, "Pipeline config file");
    pipeline->add_option("--out", o.out, "Output mesh (.obj or .ply)");
    pipeline->add_option("--report", o.report, "Output report JSON");
    pipeline->add_option("--cloud", o.cloud, "Relaxed cloud CSV");
    pipeline->add_option("--stats", o.stats, "Per-iteration statistics CSV");
    pipeline->add_option("--histogram", o.histogram, "Quality histogram CSV");
    pipeline->add_option("--defects", o.defects, "Defect list CSV");
    pipeline->add_option("--seed", o.seed, "Override the config seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (synth->parsed()) return cmd_synth(o, out);
        if (relax_cmd->parsed()) return cmd_relax(o, out);
        if (mesh_cmd->parsed()) return cmd_mesh(o, out);
        if (metrics_cmd->parsed()) return cmd_metrics(o, out);
        return cmd_pipeline(o, out);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* sub = nullptr;
        for (const CLI::App* s : app.get_subcommands()) sub = s;
        err << (sub ? sub->help() : app.help());
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

} // namespace tubemesh
