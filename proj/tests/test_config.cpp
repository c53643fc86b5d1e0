#include "tubemesh/config.hpp"
#include "tubemesh/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace tubemesh;

namespace {

ErrorCode error_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("defaults")
{
    const PipelineConfig c = parse_config("");
    CHECK(c.relax.alpha == 0.5);
    CHECK(c.relax.term_eps == 0.05);
    CHECK(c.relax.neighbor_count == 25);
    CHECK(c.seed == 42);
    CHECK(c.density == 16.0);
}

TEST_CASE("keys, comments and whitespace")
{
    const PipelineConfig c = parse_config("# tuned\n"
                                          "alpha = 0.4\n"
                                          "  mu=3   # trailing\n"
                                          "\n"
                                          "M = 30\n"
                                          "max_iters = 0\n"
                                          "pivot = bisector\n"
                                          "seed = 7\n"
                                          "density = 9.5\n"
                                          "dr_min = -0.01\n"
                                          "out = mesh.ply\n");
    CHECK(c.relax.alpha == 0.4);
    CHECK(c.relax.mu == 3.0);
    CHECK(c.relax.neighbor_count == 30);
    CHECK(c.mesh.neighbor_count == 30);
    CHECK(c.relax.max_iters == 0);
    CHECK(c.relax.pivot == PivotRule::BisectorProjection);
    CHECK(c.seed == 7);
    CHECK(c.density == 9.5);
    CHECK(*c.relax.dr_min == -0.01);
    CHECK(c.out == "mesh.ply");
}

TEST_CASE("unknown keys and syntax errors")
{
    CHECK(error_of("alpha = 0.5\nbeta = 1\n") == ErrorCode::ParseError);
    try {
        parse_config("alpha = 0.5\nbeta = 1\n");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(error_of("alpha 0.5\n") == ErrorCode::ParseError);
    CHECK(error_of("alpha = half\n") == ErrorCode::ParseError);
    CHECK(error_of("max_iters = 2.5\n") == ErrorCode::ParseError);
    CHECK(error_of("pivot = sideways\n") == ErrorCode::ParseError);
    CHECK(error_of("alpha =\n") == ErrorCode::ParseError);
}

TEST_CASE("range checks")
{
    CHECK(error_of("alpha = 1.5\n") == ErrorCode::InvalidParams);
    CHECK(error_of("alpha = 0\n") == ErrorCode::InvalidParams);
    CHECK(error_of("mass = 0\n") == ErrorCode::InvalidParams);
    CHECK(error_of("dr_min = 0.1\n") == ErrorCode::InvalidParams);
    CHECK(error_of("dr_max = -0.1\n") == ErrorCode::InvalidParams);
    CHECK(error_of("term_eps = 0\n") == ErrorCode::InvalidParams);
    CHECK(error_of("M = 5\n") == ErrorCode::InvalidParams);
    CHECK(error_of("density = -1\n") == ErrorCode::InvalidParams);
    CHECK(error_of("max_iters = -1\n") == ErrorCode::InvalidParams);
}

TEST_CASE("config file")
{
    const auto p = std::filesystem::temp_directory_path() / "tubemesh_test_config.cfg";
    write_text(p, "eta = 0.02\n");
    CHECK(read_config(p).relax.eta == 0.02);
    CHECK_THROWS_AS(read_config(p.string() + ".missing"), Error);
}
