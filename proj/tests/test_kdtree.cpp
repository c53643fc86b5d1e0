#include "tubemesh/kdtree.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace tubemesh;

namespace {

std::vector<Neighbor> brute_knn(const std::vector<Vec3>& pts, const Vec3& q, std::size_t k)
{
    std::vector<Neighbor> all;
    for (std::size_t i = 0; i < pts.size(); ++i) all.push_back({static_cast<std::uint32_t>(i), (pts[i] - q).squaredNorm()});
    std::sort(all.begin(), all.end());
    all.resize(std::min(k, all.size()));
    return all;
}

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    return pts;
}

} // namespace

TEST_CASE("knn matches brute force")
{
    const auto pts = random_points(2000, 1);
    const KdTree tree(pts);
    const auto queries = random_points(100, 2);
    for (const Vec3& q : queries) {
        for (std::size_t k : {1u, 5u, 25u}) {
            const auto got = tree.knn(q, k);
            const auto want = brute_knn(pts, q, k);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].index == want[i].index);
                CHECK(got[i].dist2 == want[i].dist2);
            }
        }
    }
}

TEST_CASE("knn clamps to the tree size")
{
    const auto pts = random_points(3, 4);
    const KdTree tree(pts);
    CHECK(tree.knn(Vec3::Zero(), 25).size() == 3);
    const KdTree empty;
    CHECK(empty.knn(Vec3::Zero(), 5).empty());
}

TEST_CASE("radius search matches brute force")
{
    const auto pts = random_points(1500, 5);
    const KdTree tree(pts);
    std::vector<Neighbor> got;
    for (const Vec3& q : random_points(50, 6)) {
        tree.radius_search(q, 1.3, got);
        auto want = brute_knn(pts, q, pts.size());
        want.erase(std::remove_if(want.begin(), want.end(), [](const Neighbor& n) { return n.dist2 > 1.3 * 1.3; }),
                   want.end());
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].index == want[i].index);
    }
}

TEST_CASE("equal distances tie by index")
{
    const std::vector<Vec3> pts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
    const KdTree tree(pts);
    const auto got = tree.knn(Vec3::Zero(), 5);
    for (std::uint32_t i = 0; i < 5; ++i) CHECK(got[i].index == i);
}

TEST_CASE("duplicate points")
{
    const std::vector<Vec3> pts(50, Vec3(1, 2, 3));
    const KdTree tree(pts);
    const auto got = tree.knn(Vec3(1, 2, 3), 10);
    REQUIRE(got.size() == 10);
    for (std::uint32_t i = 0; i < 10; ++i) CHECK(got[i].index == i);
}
