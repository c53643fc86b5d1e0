// SPDX-License-Identifier: Apache-2.0
#include "tubemesh/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tubemesh {

using nlohmann::json;

std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

double round9(double x)
{
    return std::strtod(format_number(x).c_str(), nullptr);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// centerline

namespace {

json vec_json(const Vec3& v)
{
    return json::array({round9(v.x()), round9(v.y()), round9(v.z())});
}

Vec3 json_vec(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::SchemaError, where + ": expected 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) throw Error(ErrorCode::SchemaError, where + ": expected 3 numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

const json& field(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorCode::SchemaError, where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

} // namespace

std::string centerline_to_json(const VesselTree& tree, const Vec3& frame_seed_u)
{
    json doc;
    doc["version"] = 1;
    doc["unit"] = "mm";
    doc["k"] = tree.radial_samples();
    json branches = json::array();
    for (const Branch& b : tree.branches()) {
        json jb;
        jb["id"] = b.id;
        if (b.parent) jb["parent"] = {{"branch", b.parent->branch}, {"node", b.parent->node}};
        else jb["parent"] = nullptr;
        json nodes = json::array();
        for (const CenterlineNode& n : b.nodes) {
            json radii = json::array();
            for (double r : n.radii) radii.push_back(round9(r));
            nodes.push_back({{"p", vec_json(n.position)}, {"radii", radii}});
        }
        jb["nodes"] = nodes;
        branches.push_back(jb);
    }
    doc["branches"] = branches;
    doc["frame_seed_u"] = vec_json(frame_seed_u);
    return doc.dump(2) + "\n";
}

VesselTree centerline_from_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    const std::string top = "centerline";
    if (!doc.is_object()) throw Error(ErrorCode::SchemaError, top + ": expected an object");
    const json& version = field(doc, "version", top);
    if (!version.is_number_integer() || version.get<int>() != 1) {
        throw Error(ErrorCode::SchemaError, top + ": unsupported version");
    }
    const json& unit = field(doc, "unit", top);
    if (!unit.is_string()) throw Error(ErrorCode::SchemaError, top + ": unit must be a string");
    if (unit.get<std::string>() != "mm") throw Error(ErrorCode::UnitError, "unit must be \"mm\", got \"" + unit.get<std::string>() + "\"");
    const json& jk = field(doc, "k", top);
    if (!jk.is_number_integer() || jk.get<long>() < 3) throw Error(ErrorCode::SchemaError, top + ": k must be an integer >= 3");
    const auto k = static_cast<std::size_t>(jk.get<long>());
    const Vec3 seed_u = doc.contains("frame_seed_u") ? json_vec(doc["frame_seed_u"], "frame_seed_u") : Vec3::UnitX();

    const json& jbranches = field(doc, "branches", top);
    if (!jbranches.is_array() || jbranches.empty()) throw Error(ErrorCode::SchemaError, top + ": branches must be a non-empty array");
    std::vector<Branch> branches;
    for (std::size_t bi = 0; bi < jbranches.size(); ++bi) {
        const json& jb = jbranches[bi];
        const std::string where = "branch " + std::to_string(bi);
        const json& id = field(jb, "id", where);
        if (!id.is_number_integer() || id.get<long>() != static_cast<long>(bi)) {
            throw Error(ErrorCode::SchemaError, where + ": id must equal its position");
        }
        std::optional<Attachment> parent;
        if (jb.contains("parent") && !jb["parent"].is_null()) {
            const json& jp = jb["parent"];
            const json& pb = field(jp, "branch", where + " parent");
            const json& pn = field(jp, "node", where + " parent");
            if (!pb.is_number_integer() || !pn.is_number_integer() || pn.get<long>() < 0) {
                throw Error(ErrorCode::SchemaError, where + ": parent must hold integer branch and node");
            }
            parent = Attachment{pb.get<int>(), static_cast<std::size_t>(pn.get<long>())};
        }
        const json& jnodes = field(jb, "nodes", where);
        if (!jnodes.is_array()) throw Error(ErrorCode::SchemaError, where + ": nodes must be an array");
        std::vector<Vec3> pos;
        std::vector<std::vector<double>> radii;
        for (std::size_t ni = 0; ni < jnodes.size(); ++ni) {
            const std::string nw = where + " node " + std::to_string(ni);
            pos.push_back(json_vec(field(jnodes[ni], "p", nw), nw + " p"));
            const json& jr = field(jnodes[ni], "radii", nw);
            if (!jr.is_array() || jr.size() != k) {
                throw Error(ErrorCode::SchemaError, nw + ": expected " + std::to_string(k) + " radii");
            }
            std::vector<double> r;
            for (const json& x : jr) {
                if (!x.is_number() || !(x.get<double>() > 0.0)) throw Error(ErrorCode::SchemaError, nw + ": radii must be positive numbers");
                r.push_back(x.get<double>());
            }
            radii.push_back(std::move(r));
        }
        if (pos.size() < 2) throw Error(ErrorCode::SchemaError, where + ": needs at least 2 nodes");
        Branch b = make_branch(static_cast<int>(bi), pos, radii, parent);
        branches.push_back(build_rmf_frames(std::move(b), seed_u));
    }
    return VesselTree(std::move(branches));
}

void write_centerline(const VesselTree& tree, const std::filesystem::path& path, const Vec3& frame_seed_u)
{
    write_text(path, centerline_to_json(tree, frame_seed_u));
}

VesselTree read_centerline(const std::filesystem::path& path)
{
    return centerline_from_json(read_text(path));
}

// ---------------------------------------------------------------------------
// point cloud

Cloud cloud_of(const ParticleSystem& system)
{
    Cloud c;
    for (const Particle& p : system.particles()) {
        c.positions.push_back(p.position);
        c.normals.push_back(p.normal);
        c.radii.push_back(p.radius);
    }
    return c;
}

std::string cloud_to_csv(const Cloud& cloud)
{
    std::string out = "x,y,z,nx,ny,nz,r\n";
    for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
        const Vec3& p = cloud.positions[i];
        const Vec3& n = cloud.normals[i];
        out += format_number(p.x()) + ',' + format_number(p.y()) + ',' + format_number(p.z()) + ',' +
               format_number(n.x()) + ',' + format_number(n.y()) + ',' + format_number(n.z()) + ',' +
               format_number(cloud.radii[i]) + '\n';
    }
    return out;
}

Cloud cloud_from_csv(const std::string& text)
{
    Cloud c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("x,", 0) == 0) continue;
        double v[7];
        std::istringstream row(line);
        std::string cell;
        int n = 0;
        while (std::getline(row, cell, ',')) {
            if (n == 7) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": too many fields");
            char* end = nullptr;
            v[n] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + " field " + std::to_string(n + 1) + ": not a number");
            }
            ++n;
        }
        if (n != 7) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 7 fields");
        c.positions.emplace_back(v[0], v[1], v[2]);
        c.normals.emplace_back(v[3], v[4], v[5]);
        c.radii.push_back(v[6]);
    }
    return c;
}

void write_cloud(const Cloud& cloud, const std::filesystem::path& path)
{
    write_text(path, cloud_to_csv(cloud));
}

Cloud read_cloud(const std::filesystem::path& path)
{
    return cloud_from_csv(read_text(path));
}

ParticleSystem system_from_cloud(const VesselTree& tree, const Cloud& cloud)
{
    std::vector<Particle> particles(cloud.positions.size());
    double rsum = 0.0;
    for (std::size_t i = 0; i < particles.size(); ++i) {
        particles[i].position = cloud.positions[i];
        particles[i].normal = cloud.normals[i];
        particles[i].radius = cloud.radii[i];
        rsum += cloud.radii[i];
    }
    const double r0 = particles.empty() ? 1.0 : rsum / static_cast<double>(particles.size());
    return ParticleSystem(tree, std::move(particles), 2.0 * r0, r0);
}

// ---------------------------------------------------------------------------
// meshes

MeshFormat mesh_format_for(const std::filesystem::path& path)
{
    const std::string ext = path.extension().string();
    if (ext == ".obj" || ext == ".OBJ") return MeshFormat::Obj;
    if (ext == ".ply" || ext == ".PLY") return MeshFormat::Ply;
    throw Error(ErrorCode::IoError, "unknown mesh extension '" + ext + "' (use .obj or .ply)");
}

namespace {

std::string triple(const Vec3& v)
{
    return format_number(v.x()) + ' ' + format_number(v.y()) + ' ' + format_number(v.z());
}

Vec3 vertex_normal(const TriangleMesh& mesh, std::size_t i)
{
    if (mesh.normals.size() == mesh.vertex_count()) return mesh.normals[i];
    Vec3 n = Vec3::Zero();
    for (std::uint32_t t : mesh.vertex_triangles(static_cast<std::uint32_t>(i))) n += mesh.triangle_normal(t);
    return n.norm() > 0.0 ? Vec3(n.normalized()) : Vec3::Zero();
}

} // namespace

std::string mesh_to_obj(const TriangleMesh& mesh)
{
    std::string out;
    for (const Vec3& v : mesh.vertices) out += "v " + triple(v) + '\n';
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) out += "vn " + triple(vertex_normal(mesh, i)) + '\n';
    for (const Triangle& t : mesh.triangles()) {
        out += 'f';
        for (std::uint32_t v : t) out += ' ' + std::to_string(v + 1) + "//" + std::to_string(v + 1);
        out += '\n';
    }
    return out;
}

std::string mesh_to_ply(const TriangleMesh& mesh)
{
    std::string out = "ply\nformat ascii 1.0\n";
    out += "element vertex " + std::to_string(mesh.vertex_count()) + '\n';
    out += "property float x\nproperty float y\nproperty float z\n";
    out += "property float nx\nproperty float ny\nproperty float nz\n";
    out += "element face " + std::to_string(mesh.triangle_count()) + '\n';
    out += "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        out += triple(mesh.vertices[i]) + ' ' + triple(vertex_normal(mesh, i)) + '\n';
    }
    for (const Triangle& t : mesh.triangles()) {
        out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    }
    return out;
}

void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format)
{
    write_text(path, format == MeshFormat::Obj ? mesh_to_obj(mesh) : mesh_to_ply(mesh));
}

void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path)
{
    write_mesh(mesh, path, mesh_format_for(path));
}

TriangleMesh mesh_from_obj(const std::string& text)
{
    std::vector<Vec3> v, vn;
    std::vector<Triangle> faces;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream row(line);
        std::string tag;
        if (!(row >> tag) || tag[0] == '#') continue;
        if (tag == "v" || tag == "vn") {
            double x, y, z;
            if (!(row >> x >> y >> z)) fail("expected three coordinates");
            (tag == "v" ? v : vn).emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (row >> tok) {
                const long i = std::strtol(tok.c_str(), nullptr, 10);
                if (i == 0) fail("bad face index '" + tok + "'");
                const long resolved = i > 0 ? i - 1 : static_cast<long>(v.size()) + i;
                if (resolved < 0) fail("face index out of range");
                idx.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (idx.size() < 3) fail("face needs three vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    if (!vn.empty() && vn.size() != v.size()) vn.clear();
    TriangleMesh mesh(std::move(v), std::move(vn));
    for (const Triangle& f : faces) mesh.add_triangle(f);
    return mesh;
}

TriangleMesh mesh_from_ply(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t nv = 0, nf = 0;
    int vprops = 0;
    bool in_vertex = false;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw Error(ErrorCode::ParseError, "missing ply magic");
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string a, b;
        row >> a;
        if (a == "format") {
            row >> b;
            if (b != "ascii") throw Error(ErrorCode::ParseError, "only ascii ply is supported");
        } else if (a == "element") {
            row >> b;
            std::size_t n = 0;
            row >> n;
            in_vertex = b == "vertex";
            if (b == "vertex") nv = n;
            else if (b == "face") nf = n;
        } else if (a == "property" && in_vertex) {
            ++vprops;
        } else if (a == "end_header") {
            break;
        }
    }
    if (vprops < 3) throw Error(ErrorCode::ParseError, "vertex element needs x y z");
    std::vector<Vec3> v(nv), n;
    if (vprops >= 6) n.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        std::vector<double> vals(static_cast<std::size_t>(vprops));
        for (double& x : vals) {
            if (!(in >> x)) throw Error(ErrorCode::ParseError, "truncated vertex list");
        }
        v[i] = Vec3(vals[0], vals[1], vals[2]);
        if (vprops >= 6) n[i] = Vec3(vals[3], vals[4], vals[5]);
    }
    TriangleMesh mesh(std::move(v), std::move(n));
    for (std::size_t f = 0; f < nf; ++f) {
        int count = 0;
        if (!(in >> count) || count < 3) throw Error(ErrorCode::ParseError, "bad face record");
        std::vector<std::uint32_t> idx(static_cast<std::size_t>(count));
        for (auto& x : idx) {
            if (!(in >> x)) throw Error(ErrorCode::ParseError, "truncated face list");
        }
        for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.add_triangle({idx[0], idx[k], idx[k + 1]});
    }
    return mesh;
}

TriangleMesh read_mesh(const std::filesystem::path& path)
{
    const std::string text = read_text(path);
    return mesh_format_for(path) == MeshFormat::Obj ? mesh_from_obj(text) : mesh_from_ply(text);
}

// ---------------------------------------------------------------------------
// reports

std::string report_to_json(const MeshReport& r)
{
    json doc;
    doc["triangles"] = r.qualities.size();
    doc["quality"] = {{"mean", round9(r.mean_quality)}, {"fraction_le_2_5", round9(r.fraction_quality_le_2_5)}};
    json hist = json::array();
    for (std::size_t b = 0; b < kQualityBins; ++b) {
        const double lo = 1.0 + kQualityBinWidth * static_cast<double>(b);
        json bin = {{"lo", round9(lo)}, {"count", r.histogram[b]}};
        bin["hi"] = b + 1 < kQualityBins ? json(round9(lo + kQualityBinWidth)) : json(nullptr);
        hist.push_back(bin);
    }
    doc["quality"]["histogram"] = hist;
    doc["distance"] = {{"mean", round9(r.distance.mean)},
                       {"max", round9(r.distance.max)},
                       {"rms", round9(r.distance.rms)},
                       {"samples", r.distance.samples},
                       {"mean_radius", round9(r.mean_radius)}};
    doc["uniformity_cv"] = r.uniformity_cv ? json(round9(*r.uniformity_cv)) : json(nullptr);
    const TopologyReport& t = r.topology;
    doc["topology"] = {{"vertices", t.vertices},
                       {"edges", t.edges},
                       {"triangles", t.triangles},
                       {"euler", t.euler},
                       {"boundary_edges", t.boundary_edges},
                       {"nonmanifold_edges", t.nonmanifold_edges},
                       {"pinched_vertices", t.pinched_vertices},
                       {"boundary_loops", t.boundary_loops},
                       {"loop_lengths", t.loop_lengths},
                       {"loops_closed", t.loops_closed},
                       {"tree_endpoints", t.tree_endpoints},
                       {"self_intersections", t.self_intersections},
                       {"orientation_consistent", t.orientation_consistent},
                       {"manifold", t.manifold()},
                       {"watertight", t.watertight()}};
    json flags = json::array();
    if (!r.converged) flags.push_back("NotConverged");
    if (r.incomplete) flags.push_back("TriangulationIncomplete");
    doc["flags"] = flags;
    doc["relax_iterations"] = r.iterations;
    return doc.dump(2) + "\n";
}

std::string histogram_to_csv(const MeshReport& r)
{
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < kQualityBins; ++b) {
        const double lo = 1.0 + kQualityBinWidth * static_cast<double>(b);
        out += format_number(round9(lo)) + ',' + (b + 1 < kQualityBins ? format_number(round9(lo + kQualityBinWidth)) : "inf") +
               ',' + std::to_string(r.histogram[b]) + '\n';
    }
    return out;
}

std::string defects_to_csv(const std::vector<MeshDefect>& defects)
{
    std::string out = "a,b,kind\n";
    for (const MeshDefect& d : defects) out += std::to_string(d.a) + ',' + std::to_string(d.b) + ',' + d.kind + '\n';
    return out;
}

std::string stats_to_csv(const std::vector<StepStats>& history)
{
    std::string out = "iteration,mean_disp,max_disp,mean_radius,mean_radius_change\n";
    for (const StepStats& s : history) {
        out += std::to_string(s.iteration) + ',' + format_number(s.mean_displacement) + ',' +
               format_number(s.max_displacement) + ',' + format_number(s.mean_radius) + ',' +
               format_number(s.mean_radius_change) + '\n';
    }
    return out;
}

} // namespace tubemesh
